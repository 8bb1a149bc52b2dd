#pragma once

#include <string_view>

// Data files under data/ compiled into the library (generated at build time).
namespace scout::bundled {

std::string_view public_suffix_list();
std::string_view homoglyphs();
std::string_view promo_patterns();

}  // namespace scout::bundled
