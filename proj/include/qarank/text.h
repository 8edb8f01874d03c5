#ifndef QARANK_TEXT_H_
#define QARANK_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qarank {

// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A token together with its byte range in the source text.
struct TokenSpan {
  std::string text;  // lowercased
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Lowercases and splits on runs of non-alphanumeric characters. Bytes >= 0x80
// are kept inside tokens so UTF-8 words are never split apart.
std::vector<std::string> tokenize(std::string_view text);

// Same as tokenize() but keeps the byte offsets of each token.
std::vector<TokenSpan> tokenize_with_offsets(std::string_view text);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

inline constexpr std::string_view kHashName = "fnv1a64";

// Hashed bucket ids of all unigrams and bigrams of a token sequence, in order
// of occurrence. A bigram is hashed as "<left> <right>"; unigrams never contain
// a space so the two term kinds never alias before reduction.
std::vector<std::uint32_t> hashed_ngrams(const std::vector<std::string>& tokens,
                                         std::uint32_t num_buckets);

std::string trim(std::string_view s);

}  // namespace qarank

#endif  // QARANK_TEXT_H_
