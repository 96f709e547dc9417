#include "aflow/embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>

namespace aflow {

std::vector<float> stub_embedding(std::string_view text, std::size_t dim) {
  std::vector<float> v(dim, 0.0f);
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : word) {
      h ^= c;
      h *= 1099511628211ull;
    }
    // Signed counts spread mass over both half-spaces.
    v[h % dim] += (h >> 63) ? -1.0f : 1.0f;
    word.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      word += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return v;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace aflow
