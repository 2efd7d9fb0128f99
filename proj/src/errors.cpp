#include "mabt/errors.hpp"

namespace mabt {

const char* errc_name(errc code) {
  switch (code) {
    case errc::rank_deficient: return "RankDeficient";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::invalid_size: return "InvalidSize";
    case errc::rank_retry_exhausted: return "RankRetryExhausted";
    case errc::leverage_one: return "LeverageOne";
    case errc::singular_q: return "SingularQ";
    case errc::coefficient_not_in_model: return "CoefficientNotInModel";
    case errc::zero_variance: return "ZeroVariance";
    case errc::parse_error: return "ParseError";
    case errc::missing_column: return "MissingColumn";
    case errc::non_numeric: return "NonNumeric";
    case errc::non_finite: return "NonFinite";
    case errc::degenerate_fit: return "DegenerateFit";
    case errc::sigma_not_pd: return "SigmaNotPD";
    case errc::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace mabt
