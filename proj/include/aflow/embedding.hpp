#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace aflow {

// Deterministic bag-of-words hashing embedding used by the scripted backend
// and as the on-disk cache format's producer in tests. Tokens are lowercased
// alphanumeric runs, each hashed into one of `dim` buckets.
std::vector<float> stub_embedding(std::string_view text, std::size_t dim = 256);

// Zero vectors compare as wholly dissimilar rather than dividing by zero.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

}  // namespace aflow
