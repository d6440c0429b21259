#include "chernlab/exterior_algebra.hpp"

#include <sstream>

namespace chernlab {

namespace {

template <class S>
std::string format_form(const Form<S>& f) {
  if (f.is_zero()) return "0";
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (const auto& t : f.terms()) {
    if (!first) os << " + ";
    first = false;
    os << "(" << t.coeff << ")";
    auto idx = MultiIndex::from_mask(t.mask).indices();
    if (!idx.empty()) {
      os << " e";
      for (std::size_t k = 0; k < idx.size(); ++k) os << (k ? "," : "") << idx[k];
    }
  }
  return os.str();
}

}  // namespace

std::string to_string(const Form<double>& f) { return format_form(f); }
std::string to_string(const Form<Complex>& f) { return format_form(f); }

}  // namespace chernlab
