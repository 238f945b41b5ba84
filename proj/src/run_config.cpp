#include "tonelex/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace tonelex::cli {

namespace {

std::string trim_ws(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

// TOML scalar/array to the plain string form apply_override consumes:
// strings lose their quotes, arrays become comma lists.
std::string toml_value_to_string(const std::string& raw, std::size_t line_no) {
  std::string v = trim_ws(raw);
  if (v.empty())
    throw Error(Errc::config_error,
                "config line " + std::to_string(line_no) + ": empty value");
  if (v.front() == '[') {
    if (v.back() != ']')
      throw Error(Errc::config_error,
                  "config line " + std::to_string(line_no) + ": unclosed array");
    std::string inner = v.substr(1, v.size() - 2);
    std::string out;
    std::string item;
    bool quoted = false;
    auto flush = [&] {
      std::string t = trim_ws(item);
      if (!t.empty() && t.front() == '"' && t.back() == '"' && t.size() >= 2)
        t = t.substr(1, t.size() - 2);
      if (!t.empty()) {
        if (!out.empty()) out += ',';
        out += t;
      }
      item.clear();
    };
    for (char c : inner) {
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) {
        flush();
        continue;
      }
      item += c;
    }
    flush();
    return out;
  }
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw Error(Errc::config_error,
                  "config line " + std::to_string(line_no) + ": unclosed string");
    return v.substr(1, v.size() - 2);
  }
  return v;
}

double parse_num(const std::string& v, const std::string& key) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw Error(Errc::config_error, key + ": '" + v + "' is not a number");
  return out;
}

std::int64_t parse_int(const std::string& v, const std::string& key) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw Error(Errc::config_error, key + ": '" + v + "' is not an integer");
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(Errc::config_error, key + ": '" + v + "' is not a boolean");
}

std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim_ws(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

void apply_override(RunConfig& c, const std::string& key, const std::string& v) {
  using Setter = std::function<void(RunConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"paths.input_dir", [](RunConfig& r, const std::string& s) { r.input_dir = s; }},
      {"paths.out_dir", [](RunConfig& r, const std::string& s) { r.out_dir = s; }},

      {"ingest.min_tokens_per_word",
       [](RunConfig& r, const std::string& s) {
         r.trim.min_tokens_per_word = static_cast<int>(parse_int(s, "min_tokens_per_word"));
       }},
      {"ingest.max_tokens_per_word",
       [](RunConfig& r, const std::string& s) {
         r.trim.max_tokens_per_word = static_cast<int>(parse_int(s, "max_tokens_per_word"));
       }},
      {"ingest.outlier_decile",
       [](RunConfig& r, const std::string& s) {
         r.trim.outlier_decile = parse_num(s, "outlier_decile");
       }},
      {"ingest.require_both_genders",
       [](RunConfig& r, const std::string& s) {
         r.trim.require_both_genders = parse_bool(s, "require_both_genders");
       }},
      {"ingest.rng_seed",
       [](RunConfig& r, const std::string& s) {
         r.trim.rng_seed = static_cast<std::uint64_t>(parse_int(s, "rng_seed"));
       }},
      {"ingest.outlier_on_log_f0",
       [](RunConfig& r, const std::string& s) {
         r.trim.outlier_on_log_f0 = parse_bool(s, "outlier_on_log_f0");
       }},

      {"fit.contexts",
       [](RunConfig& r, const std::string& s) { r.contexts = parse_list(s); }},
      {"fit.grid_p",
       [](RunConfig& r, const std::string& s) {
         r.grid_p = static_cast<int>(parse_int(s, "grid_p"));
       }},
      {"fit.ar1_rho",
       [](RunConfig& r, const std::string& s) { r.ar1_rho = parse_num(s, "ar1_rho"); }},
      {"fit.lexical_factor",
       [](RunConfig& r, const std::string& s) { r.lexical_factor = s; }},
      {"fit.factor_smooth_k",
       [](RunConfig& r, const std::string& s) {
         r.factor_smooth_k = static_cast<int>(parse_int(s, "factor_smooth_k"));
       }},
      {"fit.method2_group",
       [](RunConfig& r, const std::string& s) { r.method2_group = s; }},
      {"fit.methods",
       [](RunConfig& r, const std::string& s) { r.methods = parse_list(s); }},
      {"fit.withhold",
       [](RunConfig& r, const std::string& s) { r.withhold = parse_list(s); }},

      {"evaluate.train_frac",
       [](RunConfig& r, const std::string& s) { r.train_frac = parse_num(s, "train_frac"); }},
      {"evaluate.split_seed",
       [](RunConfig& r, const std::string& s) {
         r.split_seed = static_cast<std::uint64_t>(parse_int(s, "split_seed"));
       }},
      {"evaluate.permutation_reps",
       [](RunConfig& r, const std::string& s) {
         r.permutation_reps = static_cast<int>(parse_int(s, "permutation_reps"));
       }},
      {"evaluate.permutation_seed",
       [](RunConfig& r, const std::string& s) {
         r.permutation_seed = static_cast<std::uint64_t>(parse_int(s, "permutation_seed"));
       }},
      {"evaluate.nn_candidates",
       [](RunConfig& r, const std::string& s) {
         if (s != "all" && s != "partition")
           throw Error(Errc::config_error, "nn_candidates must be all or partition");
         r.nn_candidates = s;
       }},
      {"evaluate.ridge",
       [](RunConfig& r, const std::string& s) { r.ridge = parse_num(s, "ridge"); }},

      {"synth.n_words",
       [](RunConfig& r, const std::string& s) {
         r.gen.n_words = static_cast<int>(parse_int(s, "n_words"));
       }},
      {"synth.tokens_per_word_min",
       [](RunConfig& r, const std::string& s) {
         r.gen.tokens_per_word_min = static_cast<int>(parse_int(s, "tokens_per_word_min"));
       }},
      {"synth.tokens_per_word_max",
       [](RunConfig& r, const std::string& s) {
         r.gen.tokens_per_word_max = static_cast<int>(parse_int(s, "tokens_per_word_max"));
       }},
      {"synth.n_speakers",
       [](RunConfig& r, const std::string& s) {
         r.gen.n_speakers = static_cast<int>(parse_int(s, "n_speakers"));
       }},
      {"synth.q_embed",
       [](RunConfig& r, const std::string& s) {
         r.gen.q_embed = static_cast<int>(parse_int(s, "q_embed"));
       }},
      {"synth.word_deviation_sd",
       [](RunConfig& r, const std::string& s) {
         r.gen.word_deviation_sd = parse_num(s, "word_deviation_sd");
       }},
      {"synth.embed_cluster_sd",
       [](RunConfig& r, const std::string& s) {
         r.gen.embed_cluster_sd = parse_num(s, "embed_cluster_sd");
       }},
      {"synth.noise_sd",
       [](RunConfig& r, const std::string& s) { r.gen.noise_sd = parse_num(s, "noise_sd"); }},
      {"synth.ar1_rho",
       [](RunConfig& r, const std::string& s) { r.gen.ar1_rho = parse_num(s, "ar1_rho"); }},
      {"synth.missing_span_prob",
       [](RunConfig& r, const std::string& s) {
         r.gen.missing_span_prob = parse_num(s, "missing_span_prob");
       }},
      {"synth.context_amplitude",
       [](RunConfig& r, const std::string& s) {
         r.gen.context_amplitude = parse_num(s, "context_amplitude");
       }},
      {"synth.declination",
       [](RunConfig& r, const std::string& s) {
         r.gen.declination = parse_num(s, "declination");
       }},
      {"synth.sense_deviation_sd",
       [](RunConfig& r, const std::string& s) {
         r.gen.sense_deviation_sd = parse_num(s, "sense_deviation_sd");
       }},
      {"synth.plant_prototypes",
       [](RunConfig& r, const std::string& s) {
         r.gen.plant_prototypes = parse_bool(s, "plant_prototypes");
       }},
      {"synth.grid_p",
       [](RunConfig& r, const std::string& s) {
         r.gen.grid_p = static_cast<int>(parse_int(s, "grid_p"));
       }},
      {"synth.seed",
       [](RunConfig& r, const std::string& s) {
         r.gen.seed = static_cast<std::uint64_t>(parse_int(s, "seed"));
       }},
  };

  auto it = setters.find(key);
  if (it == setters.end())
    throw Error(Errc::config_error, "unknown configuration key '" + key + "'");
  it->second(c, v);
}

RunConfig load_config(const std::filesystem::path& toml_path) {
  std::ifstream in(toml_path);
  if (!in) throw Error(Errc::missing_file, "cannot open " + toml_path.string());

  RunConfig config;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_ws(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(Errc::config_error,
                    "config line " + std::to_string(line_no) + ": bad section header");
      section = trim_ws(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::config_error,
                  "config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim_ws(line.substr(0, eq));
    std::string value = toml_value_to_string(line.substr(eq + 1), line_no);
    if (section.empty())
      throw Error(Errc::config_error,
                  "config line " + std::to_string(line_no) + ": key outside a section");
    apply_override(config, section + "." + key, value);
  }
  return config;
}

}  // namespace tonelex::cli
