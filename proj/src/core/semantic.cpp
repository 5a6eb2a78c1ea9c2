#include "wildfusion/core/color.hpp"
#include "wildfusion/core/types.hpp"

namespace wf {

SemanticTable SemanticTable::default_table() {
  auto lab = [](std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return rgb_to_lab({r, g, b});
  };
  // Order of the first six entries matches TerrainClass and the roughness
  // ordering used by the synthetic sensors.
  return SemanticTable({
      {"concrete", 1.00, lab(136, 138, 141)},
      {"grass", 0.85, lab(88, 152, 74)},
      {"gravel", 0.70, lab(158, 148, 128)},
      {"leaves", 0.60, lab(170, 112, 48)},
      {"vegetation", 0.50, lab(38, 99, 43)},
      {"mud", 0.30, lab(96, 66, 38)},
      {"trunk", 0.00, lab(118, 86, 67)},
      {"rock", 0.00, lab(84, 82, 80)},
  });
}

}  // namespace wf
