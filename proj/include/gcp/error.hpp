#pragma once

#include <stdexcept>
#include <string>

namespace gcp {

enum class errc {
  non_square,
  negative_entry,
  non_zero_diagonal,
  asymmetry_too_large,
  non_finite,
  invalid_graph,
  incompatible_metric,
  zero_activity_day,
  k_too_large,
  t_out_of_range,
  bad_interval,
  bad_window,
  degenerate_variance,
  all_degenerate,
  domain_error,
  no_root,
  bad_alpha,
  bad_model,
  parse_error,
  dimension_mismatch,
  unknown_format,
  io_error,
  bad_config,
  internal,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::non_square: return "NonSquare";
    case errc::negative_entry: return "NegativeEntry";
    case errc::non_zero_diagonal: return "NonZeroDiagonal";
    case errc::asymmetry_too_large: return "AsymmetryTooLarge";
    case errc::non_finite: return "NonFinite";
    case errc::invalid_graph: return "InvalidGraph";
    case errc::incompatible_metric: return "IncompatibleMetric";
    case errc::zero_activity_day: return "ZeroActivityDay";
    case errc::k_too_large: return "KTooLarge";
    case errc::t_out_of_range: return "TOutOfRange";
    case errc::bad_interval: return "BadInterval";
    case errc::bad_window: return "BadWindow";
    case errc::degenerate_variance: return "DegenerateVariance";
    case errc::all_degenerate: return "AllDegenerate";
    case errc::domain_error: return "DomainError";
    case errc::no_root: return "NoRoot";
    case errc::bad_alpha: return "BadAlpha";
    case errc::bad_model: return "BadModel";
    case errc::parse_error: return "ParseError";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::unknown_format: return "UnknownFormat";
    case errc::io_error: return "IoError";
    case errc::bad_config: return "BadConfig";
    case errc::internal: return "Internal";
  }
  return "Unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace gcp
