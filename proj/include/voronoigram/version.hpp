#pragma once

#include <string_view>

namespace voronoigram {

#ifndef VORONOIGRAM_VERSION
#define VORONOIGRAM_VERSION "unknown"
#endif

constexpr std::string_view version() { return VORONOIGRAM_VERSION; }

}  // namespace voronoigram
