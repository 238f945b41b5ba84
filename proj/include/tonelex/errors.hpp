#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tonelex {

enum class Errc {
  missing_track,
  duplicate_token,
  embedding_dim_mismatch,
  non_positive_f0,
  parse_error,
  unknown_tone_pattern,
  non_monotone_time,
  too_short,
  empty_result,
  out_of_domain,
  singular_system,
  degenerate_fit,
  invalid_rho,
  empty_data,
  too_few_samples,
  empty_pattern,
  unseen_level,
  shape_mismatch,
  zero_variance,
  word_too_small,
  config_error,
  missing_file,
  validation_failed,
};

const char* errc_name(Errc c);

/// Exception carrying a machine-readable code plus a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// One violation found while cross-referencing a dataset.
struct ValidationIssue {
  Errc code;
  std::string token_id;
  std::string detail;
};

/// Thrown when dataset construction fails; carries every violation found,
/// not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues)
      : Error(Errc::validation_failed,
              std::to_string(issues.size()) + " issue(s), first: " +
                  (issues.empty() ? std::string("<none>") : issues.front().detail)),
        issues_(std::move(issues)) {}

  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

}  // namespace tonelex
