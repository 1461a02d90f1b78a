#include "cfstat/homography.hpp"

#include <sstream>

namespace cfstat {

std::string to_string(const Homography& h) {
  std::ostringstream os;
  os << "[";
  for (int r = 0; r < h.order(); ++r) {
    if (r) os << "; ";
    for (int c = 0; c < h.order(); ++c) {
      if (c) os << ",";
      os << h.at(r, c);
    }
  }
  os << "]";
  return os.str();
}

}  // namespace cfstat
