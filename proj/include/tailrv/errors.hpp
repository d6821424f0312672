#pragma once

#include <stdexcept>
#include <string>

namespace tailrv {

enum class errc {
  invalid_window,
  invalid_eta,
  unsupported_dimension,
  incompatible_grids,
  degenerate_site,
  division_by_zero_norm,
  tail_family_violation,
  support_mismatch,
  alignment,
  non_psd_kernel,
  invalid_sigma,
  insufficient_exceedances,
  degenerate_sample,
  config,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_window: return "invalid-window";
    case errc::invalid_eta: return "invalid-eta";
    case errc::unsupported_dimension: return "unsupported-dimension";
    case errc::incompatible_grids: return "incompatible-grids";
    case errc::degenerate_site: return "degenerate-site";
    case errc::division_by_zero_norm: return "division-by-zero-norm";
    case errc::tail_family_violation: return "tail-family-violation";
    case errc::support_mismatch: return "support-mismatch";
    case errc::alignment: return "alignment";
    case errc::non_psd_kernel: return "non-PSD-kernel";
    case errc::invalid_sigma: return "invalid-sigma";
    case errc::insufficient_exceedances: return "insufficient-exceedances";
    case errc::degenerate_sample: return "degenerate-sample";
    case errc::config: return "config";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc kind, const std::string& what)
      : std::runtime_error(std::string(errc_name(kind)) + ": " + what), kind_(kind) {}
  errc kind() const { return kind_; }

 private:
  errc kind_;
};

}  // namespace tailrv
