#include "qarank/text.h"

namespace qarank {

namespace {

bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

}  // namespace

std::vector<TokenSpan> tokenize_with_offsets(std::string_view text) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_token_byte(text[i])) ++i;
    if (i == text.size()) break;
    TokenSpan tok;
    tok.begin = i;
    while (i < text.size() && is_token_byte(text[i])) {
      tok.text.push_back(lower(text[i]));
      ++i;
    }
    tok.end = i;
    out.push_back(std::move(tok));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_with_offsets(text)) out.push_back(std::move(t.text));
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::uint32_t> hashed_ngrams(const std::vector<std::string>& tokens,
                                         std::uint32_t num_buckets) {
  std::vector<std::uint32_t> out;
  if (num_buckets == 0) throw Error("num_buckets must be >= 1");
  out.reserve(tokens.size() * 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.push_back(static_cast<std::uint32_t>(fnv1a64(tokens[i]) % num_buckets));
    if (i + 1 < tokens.size()) {
      std::string bigram = tokens[i];
      bigram.push_back(' ');
      bigram += tokens[i + 1];
      out.push_back(static_cast<std::uint32_t>(fnv1a64(bigram) % num_buckets));
    }
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  auto ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (b < e && ws(s[b])) ++b;
  while (e > b && ws(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace qarank
