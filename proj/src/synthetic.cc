#include "qarank/synthetic.h"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <unordered_set>

#include "qarank/text.h"

namespace qarank::synthetic {

namespace {

// Names never contain q, x or z; distractor words always do.
constexpr std::string_view kConsonants = "bcdfghklmnprstvw";
constexpr std::string_view kVowels = "aeiou";
constexpr std::string_view kNoiseConsonants = "qxz";

std::uint64_t pick(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string syllable_word(std::mt19937_64& rng, std::string_view consonants, int syllables) {
  std::string w;
  for (int i = 0; i < syllables; ++i) {
    w.push_back(consonants[pick(rng, consonants.size())]);
    w.push_back(kVowels[pick(rng, kVowels.size())]);
  }
  if (pick(rng, 2) == 0) w.push_back(consonants[pick(rng, consonants.size())]);
  return w;
}

class NameSource {
 public:
  explicit NameSource(std::uint64_t seed) : rng_(seed) {
    for (const char* w : {"the", "town", "of", "was", "founded", "in", "is", "located",
                          "region", "river", "flows", "through", "population", "by"})
      used_.insert(w);
  }

  // Capitalized, unique across every call.
  std::string next() {
    for (;;) {
      std::string w = syllable_word(rng_, kConsonants, 2 + static_cast<int>(pick(rng_, 2)));
      if (used_.insert(w).second) return capitalize(w);
    }
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::set<std::string> used_;
};

std::string pad(std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return buf;
}

std::unordered_set<std::uint32_t> question_buckets(const ToyDataset& base,
                                                   std::uint32_t num_buckets) {
  std::unordered_set<std::uint32_t> out;
  for (const auto& q : base.questions)
    for (auto b : hashed_ngrams(tokenize(q.question_text), num_buckets)) out.insert(b);
  return out;
}

bool touches(const std::string& text, const std::unordered_set<std::uint32_t>& buckets,
             std::uint32_t num_buckets) {
  for (auto b : hashed_ngrams(tokenize(text), num_buckets))
    if (buckets.count(b)) return true;
  return false;
}

std::string noise_sentence(std::mt19937_64& rng, int words) {
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i) s.push_back(' ');
    s += syllable_word(rng, kNoiseConsonants, 1 + static_cast<int>(pick(rng, 3)));
  }
  return s + ".";
}

void check_size(const ToyDataset& base, std::size_t size) {
  if (size < base.documents.size())
    throw Error("corpus size " + std::to_string(size) + " is below the base corpus size " +
                std::to_string(base.documents.size()));
}

}  // namespace

ToyDataset make_toy_dataset(std::uint64_t seed, std::size_t num_documents,
                            std::size_t num_questions) {
  if (num_documents == 0) throw Error("toy dataset needs at least one document");
  if (num_documents > 9000) throw Error("toy dataset is limited to 9000 documents");
  NameSource names(seed);
  ToyDataset ds;
  struct Facts {
    std::string town, founder, year, river, region, population;
  };
  std::vector<Facts> facts;
  // Years and populations are unique so an answer string occurs in one document.
  std::vector<int> years(num_documents);
  for (std::size_t i = 0; i < num_documents; ++i) years[i] = 1000 + static_cast<int>(i);
  std::shuffle(years.begin(), years.end(), names.rng());
  for (std::size_t i = 0; i < num_documents; ++i) {
    Facts f;
    f.town = names.next();
    f.founder = names.next() + " " + names.next();
    f.year = std::to_string(years[i]);
    f.river = names.next();
    f.region = names.next();
    f.population = std::to_string(10000 + 97 * i + pick(names.rng(), 97));
    Document d;
    d.doc_id = "town-" + pad(i, 4);
    d.title = f.town;
    d.body = f.town + " is located in the " + f.region + " region. The " + f.river +
             " river flows through " + f.town + ".\n\n" + f.founder + " founded the town of " +
             f.town + ".\n\nThe town of " + f.town + " was founded in " + f.year +
             ".\n\nThe population of " + f.town + " is " + f.population + ".";
    ds.documents.push_back(std::move(d));
    facts.push_back(std::move(f));
  }
  for (std::size_t i = 0; i < num_questions; ++i) {
    const Facts& f = facts[i % num_documents];
    QuestionRecord q;
    q.question_id = "toy-" + pad(i, 4);
    switch (i % 5) {
      case 0:
        q.question_text = "Who founded the town of " + f.town + "?";
        q.gold_answers = {f.founder};
        break;
      case 1:
        q.question_text = "When was the town of " + f.town + " founded?";
        q.gold_answers = {f.year};
        break;
      case 2:
        q.question_text = "Which river flows through " + f.town + "?";
        q.gold_answers = {f.river, f.river + " river"};
        break;
      case 3:
        q.question_text = "In which region is " + f.town + " located?";
        q.gold_answers = {f.region};
        break;
      default:
        q.question_text = "What is the population of " + f.town + "?";
        q.gold_answers = {f.population};
        break;
    }
    ds.questions.push_back(std::move(q));
  }
  return ds;
}

std::vector<Document> make_disjoint_sweep_corpus(const ToyDataset& base, std::size_t size,
                                                 std::uint64_t seed,
                                                 std::uint32_t num_buckets) {
  check_size(base, size);
  const auto forbidden = question_buckets(base, num_buckets);
  std::vector<Document> docs = base.documents;
  docs.reserve(size);
  for (std::size_t i = 0; docs.size() < size; ++i) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      std::seed_seq seq{seed, static_cast<std::uint64_t>(i), attempt};
      std::mt19937_64 rng(seq);
      Document d;
      d.doc_id = "zz-distractor-" + pad(i, 7);
      d.title = capitalize(syllable_word(rng, kNoiseConsonants, 2));
      d.body = noise_sentence(rng, 12) + "\n\n" + noise_sentence(rng, 12);
      // Checked with and without the title so either index setting is safe.
      if (touches(d.title + "\n" + d.body, forbidden, num_buckets) ||
          touches(d.body, forbidden, num_buckets))
        continue;
      docs.push_back(std::move(d));
      break;
    }
  }
  return docs;
}

std::vector<Document> make_noisy_sweep_corpus(const ToyDataset& base, std::size_t size,
                                              std::uint64_t seed) {
  check_size(base, size);
  if (base.questions.empty() && size > base.documents.size())
    throw Error("noisy distractors need at least one question");
  std::vector<Document> docs = base.documents;
  docs.reserve(size);
  for (std::size_t i = 0; docs.size() < size; ++i) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(i)};
    std::mt19937_64 rng(seq);
    const auto& q = base.questions[i % base.questions.size()];
    std::string words;
    for (const auto& t : tokenize(q.question_text)) words += t + " ";
    const std::string wrong = capitalize(syllable_word(rng, kNoiseConsonants, 2)) + " " +
                              capitalize(syllable_word(rng, kNoiseConsonants, 2));
    Document d;
    d.doc_id = "zz-noise-" + pad(i, 7);
    d.title = capitalize(syllable_word(rng, kNoiseConsonants, 2));
    d.body = words + wrong + " " + words + noise_sentence(rng, 4);
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace qarank::synthetic
