#pragma once

#include <string_view>
#include <vector>

namespace tvn {

const std::vector<std::string_view>& lexicon_texts();

}  // namespace tvn
