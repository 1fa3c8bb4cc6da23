#include "mrsabr/model.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>

#include "mrsabr/errors.hpp"

namespace mrsabr {

std::string_view to_string(Model m) noexcept {
  switch (m) {
    case Model::HSABR: return "hsabr";
    case Model::MRSABR: return "mrsabr";
    case Model::CIRZABR: return "cirzabr";
  }
  return "unknown";
}

Model parse_model(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "hsabr") return Model::HSABR;
  if (lower == "mrsabr") return Model::MRSABR;
  if (lower == "cirzabr" || lower == "cir-zabr") return Model::CIRZABR;
  throw Error(ErrorCode::InvalidArgument, "unknown model '" + std::string(name) + "'");
}

void ModelParams::validate() const {
  auto fail = [](const char* what, double v) {
    std::ostringstream os;
    os << what << " (got " << v << ")";
    throw Error(ErrorCode::InvalidArgument, os.str());
  };
  if (!(alpha > 0.0)) fail("alpha must be > 0", alpha);
  if (!(theta > 0.0)) fail("theta must be > 0", theta);
  if (!(lambda > 0.0)) fail("lambda must be > 0", lambda);
  if (!(nu >= 0.0)) fail("nu must be >= 0", nu);
  if (!(rho > -1.0 && rho < 1.0)) fail("rho must lie in (-1, 1)", rho);
}

}  // namespace mrsabr
