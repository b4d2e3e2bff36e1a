#pragma once

#include <filesystem>
#include <string>

#include "tropfact/recsys.hpp"

namespace tropfact::cli {

// Downloads the public MovieLens archive for `format` and extracts its
// ratings file below dest. Returns the path of the extracted file.
std::filesystem::path fetch_movielens(RatingsFormat format, const std::filesystem::path& dest);

// Default location of the ratings file below a data directory.
std::filesystem::path default_ratings_path(RatingsFormat format, const std::filesystem::path& root);

}  // namespace tropfact::cli
