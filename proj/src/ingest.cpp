#include "tonelex/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "tonelex/csv.hpp"
#include "tonelex/rng.hpp"

namespace tonelex::ingest {

namespace {

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw Error(Errc::parse_error, where + ": '" + s + "' is not a number");
  return v;
}

std::string at_line(const std::filesystem::path& path, std::size_t line,
                    const std::string& column) {
  return path.filename().string() + " line " + std::to_string(line) +
         ", column " + column;
}

const std::vector<std::string> kTokenSchema = {
    "token_id",    "word",          "tone_pattern", "speaker",
    "gender",      "preceding_tone", "following_tone", "speech_rate",
    "norm_utt_pos", "bg_prob_prev",  "bg_prob_fol",  "sense_type"};

}  // namespace

std::vector<TokenRecord> read_tokens(const std::filesystem::path& path) {
  csv::Table table = csv::read_table(path);
  if (table.header.size() < kTokenSchema.size())
    throw Error(Errc::parse_error,
                path.filename().string() + ": header has " +
                    std::to_string(table.header.size()) + " columns, expected at least " +
                    std::to_string(kTokenSchema.size()));
  for (std::size_t i = 0; i < kTokenSchema.size(); ++i)
    if (table.header[i] != kTokenSchema[i])
      throw Error(Errc::parse_error,
                  path.filename().string() + ": header column " + std::to_string(i) +
                      " must be '" + kTokenSchema[i] + "', got '" + table.header[i] + "'");

  // Extension columns: numeric if every value parses, categorical otherwise.
  const std::size_t n_extra = table.header.size() - kTokenSchema.size();
  std::vector<bool> extra_numeric(n_extra, true);
  for (const auto& row : table.rows)
    for (std::size_t e = 0; e < n_extra; ++e) {
      const std::string& v = row[kTokenSchema.size() + e];
      if (!extra_numeric[e]) continue;
      double out = 0.0;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
      if (ec != std::errc() || ptr != v.data() + v.size()) extra_numeric[e] = false;
    }

  std::vector<TokenRecord> tokens;
  tokens.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    TokenRecord tok;
    tok.token_id = row[0];
    tok.word = row[1];
    try {
      tok.tone_pattern = parse_tone_pattern(row[2]);
    } catch (const Error& e) {
      if (e.code() == Errc::unknown_tone_pattern)
        throw Error(Errc::unknown_tone_pattern,
                    at_line(path, line, "tone_pattern") + ": " + e.what());
      throw;
    }
    tok.speaker = row[3];
    try {
      tok.gender = parse_gender(row[4]);
      tok.preceding_tone = parse_tone(row[5]);
      tok.following_tone = parse_tone(row[6]);
    } catch (const Error& e) {
      throw Error(Errc::parse_error, at_line(path, line, "categorical") + ": " + e.what());
    }
    tok.speech_rate = parse_double(row[7], at_line(path, line, "speech_rate"));
    tok.norm_utt_pos = parse_double(row[8], at_line(path, line, "norm_utt_pos"));
    tok.bg_prob_prev = parse_double(row[9], at_line(path, line, "bg_prob_prev"));
    tok.bg_prob_fol = parse_double(row[10], at_line(path, line, "bg_prob_fol"));
    if (!(tok.speech_rate > 0.0))
      throw Error(Errc::parse_error,
                  at_line(path, line, "speech_rate") + ": must be positive");
    if (tok.norm_utt_pos < 0.0 || tok.norm_utt_pos > 1.0)
      throw Error(Errc::parse_error,
                  at_line(path, line, "norm_utt_pos") + ": must lie in [0,1]");
    for (auto [value, name] : {std::pair{tok.bg_prob_prev, "bg_prob_prev"},
                               std::pair{tok.bg_prob_fol, "bg_prob_fol"}})
      if (value < 0.0 || value > 1.0)
        throw Error(Errc::parse_error,
                    at_line(path, line, name) + ": must lie in [0,1]");
    if (!row[11].empty()) tok.sense_type = row[11];
    for (std::size_t e = 0; e < n_extra; ++e) {
      const std::string& name = table.header[kTokenSchema.size() + e];
      const std::string& value = row[kTokenSchema.size() + e];
      if (extra_numeric[e])
        tok.extra_numeric[name] = parse_double(value, at_line(path, line, name));
      else
        tok.extra_factor[name] = value;
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::map<std::string, F0Track> read_f0(const std::filesystem::path& f0_path,
                                       const std::filesystem::path& durations_path) {
  csv::Table durations = csv::read_table(durations_path);
  if (durations.header != std::vector<std::string>{"token_id", "duration_ms"})
    throw Error(Errc::parse_error,
                durations_path.filename().string() +
                    ": header must be token_id,duration_ms");
  std::map<std::string, double> duration_of;
  for (std::size_t r = 0; r < durations.rows.size(); ++r) {
    const auto& row = durations.rows[r];
    double d = parse_double(row[1], at_line(durations_path, durations.line_numbers[r],
                                            "duration_ms"));
    if (!(d > 0.0))
      throw Error(Errc::parse_error,
                  at_line(durations_path, durations.line_numbers[r], "duration_ms") +
                      ": must be positive");
    if (!duration_of.emplace(row[0], d).second)
      throw Error(Errc::duplicate_token,
                  "duration listed twice for token " + row[0]);
  }

  csv::Table f0 = csv::read_table(f0_path);
  if (f0.header != std::vector<std::string>{"token_id", "t_ms", "f0_hz"})
    throw Error(Errc::parse_error,
                f0_path.filename().string() + ": header must be token_id,t_ms,f0_hz");

  std::map<std::string, F0Track> tracks;
  for (std::size_t r = 0; r < f0.rows.size(); ++r) {
    const auto& row = f0.rows[r];
    const std::size_t line = f0.line_numbers[r];
    const std::string& id = row[0];
    double t_ms = parse_double(row[1], at_line(f0_path, line, "t_ms"));
    double f0_hz = parse_double(row[2], at_line(f0_path, line, "f0_hz"));
    if (!(f0_hz > 0.0))
      throw Error(Errc::parse_error,
                  at_line(f0_path, line, "f0_hz") +
                      ": non-positive f0 (voiceless spans must be absent rows)");
    auto [it, inserted] = tracks.try_emplace(id);
    F0Track& track = it->second;
    if (inserted) {
      track.token_id = id;
      auto dur = duration_of.find(id);
      if (dur == duration_of.end())
        throw Error(Errc::parse_error,
                    at_line(f0_path, line, "token_id") + ": no duration for token " + id);
      track.duration_ms = dur->second;
    }
    if (!track.samples.empty() && !(t_ms > track.samples.back().t_ms))
      throw Error(Errc::non_monotone_time,
                  "token " + id + ": t=" + row[1] + " ms at line " +
                      std::to_string(line) + " does not increase");
    if (t_ms < 0.0 || t_ms > track.duration_ms)
      throw Error(Errc::parse_error,
                  at_line(f0_path, line, "t_ms") + ": outside [0, duration]");
    track.samples.push_back({t_ms, f0_hz});
  }
  return tracks;
}

EmbeddingMap read_embeddings(const std::filesystem::path& path) {
  // Parsed line by line (not via read_table) so that a row of the wrong
  // width reports EmbeddingDimMismatch instead of a generic field-count
  // parse error.
  std::ifstream in(path);
  if (!in) throw Error(Errc::missing_file, "cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::size_t q = 0;
  EmbeddingMap out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = csv::parse_line(line, line_no);
    if (line_no == 1) {
      if (fields.empty() || fields[0] != "token_id")
        throw Error(Errc::parse_error,
                    path.filename().string() + ": first column must be token_id");
      if (fields.size() < 2)
        throw Error(Errc::parse_error,
                    path.filename().string() + ": no embedding columns");
      q = fields.size() - 1;
      continue;
    }
    if (fields.size() != q + 1)
      throw Error(Errc::embedding_dim_mismatch,
                  path.filename().string() + " line " + std::to_string(line_no) +
                      ": expected " + std::to_string(q) + " values, got " +
                      std::to_string(fields.size() - 1));
    std::vector<double> vec(q);
    for (std::size_t j = 0; j < q; ++j)
      vec[j] = parse_double(fields[j + 1],
                            at_line(path, line_no, "e" + std::to_string(j)));
    if (!out.emplace(fields[0], std::move(vec)).second)
      throw Error(Errc::duplicate_token, "embedding listed twice for token " + fields[0]);
  }
  if (line_no == 0)
    throw Error(Errc::parse_error, path.string() + " is empty");
  return out;
}

void write_dataset(const CorpusDataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };

  // extension columns, if any, in sorted order after the fixed schema
  std::set<std::string> extra_num, extra_fac;
  for (const TokenRecord& t : dataset.tokens) {
    for (const auto& [k, v] : t.extra_numeric) extra_num.insert(k);
    for (const auto& [k, v] : t.extra_factor) extra_fac.insert(k);
  }

  {
    std::ofstream out(dir / "tokens.csv");
    std::string header =
        "token_id,word,tone_pattern,speaker,gender,preceding_tone,"
        "following_tone,speech_rate,norm_utt_pos,bg_prob_prev,bg_prob_fol,"
        "sense_type";
    for (const auto& k : extra_num) header += "," + k;
    for (const auto& k : extra_fac) header += "," + k;
    out << header << "\n";
    for (const TokenRecord& t : dataset.tokens) {
      std::vector<std::string> fields = {
          t.token_id,       t.word,
          t.tone_pattern.label(), t.speaker,
          to_string(t.gender),    to_string(t.preceding_tone),
          to_string(t.following_tone), fmt(t.speech_rate),
          fmt(t.norm_utt_pos),    fmt(t.bg_prob_prev),
          fmt(t.bg_prob_fol),     t.sense_type.value_or("")};
      for (const auto& k : extra_num) fields.push_back(fmt(t.extra_numeric.at(k)));
      for (const auto& k : extra_fac) fields.push_back(t.extra_factor.at(k));
      out << csv::join_row(fields) << "\n";
    }
  }
  {
    std::ofstream f0(dir / "f0.csv");
    std::ofstream durations(dir / "durations.csv");
    f0 << "token_id,t_ms,f0_hz\n";
    durations << "token_id,duration_ms\n";
    for (const TokenRecord& t : dataset.tokens) {
      const F0Track& track = dataset.tracks.at(t.token_id);
      durations << t.token_id << "," << fmt(track.duration_ms) << "\n";
      for (const F0Sample& s : track.samples)
        f0 << t.token_id << "," << fmt(s.t_ms) << "," << fmt(s.f0_hz) << "\n";
    }
  }
  if (dataset.has_embeddings()) {
    std::ofstream out(dir / "embeddings.csv");
    const std::size_t q = dataset.embedding_dim();
    out << "token_id";
    for (std::size_t j = 0; j < q; ++j) out << ",e" << j;
    out << "\n";
    for (const TokenRecord& t : dataset.tokens) {
      auto it = dataset.embeddings.find(t.token_id);
      if (it == dataset.embeddings.end()) continue;
      out << t.token_id;
      for (double v : it->second) out << "," << fmt(v);
      out << "\n";
    }
  }
}

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty())
    throw Error(Errc::empty_data, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  const double h = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

OutlierResult outlier_filter(const std::map<std::string, F0Track>& tracks,
                             double decile, bool on_log_f0) {
  if (!(decile > 0.0) || !(decile < 1.0))
    throw Error(Errc::config_error, "outlier decile must lie in (0,1)");

  OutlierResult result;
  std::vector<double> sds;
  for (const auto& [id, track] : tracks) {
    if (track.samples.size() < 2) {
      result.removed.push_back({id, "TooShort"});
      continue;
    }
    std::vector<double> diffs;
    diffs.reserve(track.samples.size() - 1);
    for (std::size_t i = 1; i < track.samples.size(); ++i) {
      double a = track.samples[i - 1].f0_hz;
      double b = track.samples[i].f0_hz;
      if (on_log_f0) {
        a = std::log(a);
        b = std::log(b);
      }
      diffs.push_back(b - a);
    }
    double sd = 0.0;
    if (diffs.size() >= 2) {
      const double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) /
                          static_cast<double>(diffs.size());
      double ssd = 0.0;
      for (double d : diffs) ssd += (d - mean) * (d - mean);
      sd = std::sqrt(ssd / static_cast<double>(diffs.size() - 1));
    }
    result.diff_sd[id] = sd;
    sds.push_back(sd);
  }

  if (!sds.empty()) {
    result.threshold = quantile_linear(sds, decile);
    for (const auto& [id, sd] : result.diff_sd) {
      if (sd > result.threshold)
        result.removed.push_back({id, "Outlier"});
      else
        result.kept.push_back(id);
    }
  }
  return result;
}

std::pair<CorpusDataset, TrimReport> trim(const CorpusDataset& dataset,
                                          const TrimConfig& config) {
  if (config.min_tokens_per_word > config.max_tokens_per_word)
    throw Error(Errc::config_error, "min_tokens_per_word exceeds max_tokens_per_word");

  TrimReport report;
  report.config = config;
  report.input_tokens = dataset.tokens.size();
  {
    std::set<std::string> words;
    for (const auto& t : dataset.tokens) words.insert(t.word);
    report.input_words = words.size();
  }

  // Stage 1: outlier filter (includes TooShort removals). The SD
  // distribution is taken over the dataset's own tokens only.
  std::map<std::string, F0Track> token_tracks;
  for (const TokenRecord& t : dataset.tokens)
    token_tracks[t.token_id] = dataset.track(t.token_id);
  OutlierResult outliers =
      outlier_filter(token_tracks, config.outlier_decile, config.outlier_on_log_f0);
  report.outlier_sd_threshold = outliers.threshold;
  std::set<std::string> dropped;
  for (const RemovalRecord& rec : outliers.removed) {
    dropped.insert(rec.token_id);
    report.removals.push_back(rec);
    if (rec.reason == "TooShort")
      ++report.removed_too_short;
    else
      ++report.removed_outlier;
  }

  std::vector<const TokenRecord*> survivors;
  for (const TokenRecord& t : dataset.tokens)
    if (!dropped.contains(t.token_id)) survivors.push_back(&t);

  // Stage 2: words with too few tokens.
  auto word_counts = [&survivors] {
    std::map<std::string, int> counts;
    for (const TokenRecord* t : survivors) ++counts[t->word];
    return counts;
  };
  {
    std::map<std::string, int> counts = word_counts();
    std::vector<const TokenRecord*> next;
    for (const TokenRecord* t : survivors) {
      if (counts[t->word] < config.min_tokens_per_word) {
        report.removals.push_back({t->token_id, "MinTokensPerWord"});
        ++report.removed_min_word_count;
      } else {
        next.push_back(t);
      }
    }
    for (const auto& [word, c] : counts)
      if (c < config.min_tokens_per_word) ++report.words_removed_by_rule["MinTokensPerWord"];
    survivors = std::move(next);
  }

  // Stage 3: per-word cap, uniform sample under a per-word derived seed so
  // the outcome does not depend on token order.
  {
    std::map<std::string, std::vector<std::size_t>> by_word;
    for (std::size_t i = 0; i < survivors.size(); ++i)
      by_word[survivors[i]->word].push_back(i);
    std::set<std::size_t> capped_out;
    for (auto& [word, idx] : by_word) {
      if (static_cast<int>(idx.size()) <= config.max_tokens_per_word) continue;
      std::mt19937_64 rng = seeded_rng(config.rng_seed, word);
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t j = config.max_tokens_per_word; j < idx.size(); ++j)
        capped_out.insert(idx[j]);
    }
    if (!capped_out.empty()) {
      std::vector<const TokenRecord*> next;
      for (std::size_t i = 0; i < survivors.size(); ++i) {
        if (capped_out.contains(i)) {
          report.removals.push_back({survivors[i]->token_id, "Cap"});
          ++report.removed_cap;
        } else {
          next.push_back(survivors[i]);
        }
      }
      survivors = std::move(next);
    }
  }

  // Stage 4: words heard from one gender only.
  if (config.require_both_genders) {
    std::map<std::string, std::pair<bool, bool>> genders;
    for (const TokenRecord* t : survivors) {
      auto& g = genders[t->word];
      (t->gender == Gender::female ? g.first : g.second) = true;
    }
    std::vector<const TokenRecord*> next;
    for (const TokenRecord* t : survivors) {
      const auto& g = genders[t->word];
      if (g.first && g.second) {
        next.push_back(t);
      } else {
        report.removals.push_back({t->token_id, "GenderRule"});
        ++report.removed_gender_rule;
      }
    }
    for (const auto& [word, g] : genders)
      if (!(g.first && g.second)) ++report.words_removed_by_rule["GenderRule"];
    survivors = std::move(next);
  }

  if (survivors.empty())
    throw Error(Errc::empty_result, "no tokens survive trimming");

  CorpusDataset out;
  out.tokens.reserve(survivors.size());
  std::set<std::string> retained_words;
  for (const TokenRecord* t : survivors) {
    out.tokens.push_back(*t);
    out.tracks[t->token_id] = dataset.tracks.at(t->token_id);
    auto emb = dataset.embeddings.find(t->token_id);
    if (emb != dataset.embeddings.end()) out.embeddings.insert(*emb);
    retained_words.insert(t->word);
    ++report.retained_by_context[t->tonal_context().label()];
  }
  report.retained_tokens = out.tokens.size();
  report.retained_words = retained_words.size();
  return {std::move(out), std::move(report)};
}

}  // namespace tonelex::ingest
