#include "embscore/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "embscore/error.h"
#include "embscore/matrix.h"
#include "embscore/random.h"

namespace embscore {

namespace {

std::vector<double> RandomUnit(CounterRng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  while (norm < 1e-6) {
    for (double& x : v) x = rng.NextGaussian();
    norm = Norm(v);
  }
  for (double& x : v) x /= norm;
  return v;
}

std::string Numbered(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%02zu", prefix, i);
  return buf;
}

std::string Padded(std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return buf;
}

}  // namespace

std::string JoinWords(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

SynonymWorld MakeSynonymWorld(std::size_t vocab_size, std::size_t dim,
                              double synonym_cosine, std::uint64_t seed) {
  if (dim < 2 || !(std::fabs(synonym_cosine) <= 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "synonym world needs dim >= 2 and |cos| <= 1");
  }
  SynonymWorld world;
  CounterRng rng(seed, 0);
  const double side = std::sqrt(1.0 - synonym_cosine * synonym_cosine);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    const auto base = RandomUnit(rng, dim);
    // Orthogonal direction: project a random vector off `base`.
    std::vector<double> ortho;
    double norm = 0.0;
    while (norm < 1e-6) {
      ortho = RandomUnit(rng, dim);
      const double d = Dot(ortho, base);
      for (std::size_t k = 0; k < dim; ++k) ortho[k] -= d * base[k];
      norm = Norm(ortho);
    }
    std::vector<double> syn(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      syn[k] = synonym_cosine * base[k] + side * ortho[k] / norm;
    }
    world.words.push_back(Numbered('w', i));
    world.synonyms.push_back(Numbered('s', i));
    world.table.emplace(world.words.back(), base);
    world.table.emplace(world.synonyms.back(), syn);
  }
  return world;
}

SubstitutionCorpus MakeSubstitutionCorpus(const SynonymWorld& world,
                                          std::size_t sentences,
                                          std::size_t max_substitutions,
                                          std::size_t min_length,
                                          std::size_t max_length, std::uint64_t seed) {
  if (world.words.empty() || min_length == 0 || min_length > max_length ||
      max_substitutions == 0 || max_substitutions > min_length) {
    throw Error(ErrorKind::kInvalidInput, "bad substitution corpus parameters");
  }
  SubstitutionCorpus corpus;
  std::vector<std::size_t> word_of;
  for (std::size_t s = 0; s < sentences; ++s) {
    CounterRng rng(seed, s);
    const std::size_t len = min_length + rng.NextBelow(max_length - min_length + 1);
    word_of.clear();
    std::vector<std::string> ref;
    for (std::size_t t = 0; t < len; ++t) {
      word_of.push_back(rng.NextBelow(world.words.size()));
      ref.push_back(world.words[word_of.back()]);
    }
    const std::size_t subs = rng.NextBelow(max_substitutions + 1);
    std::vector<std::size_t> pos(len);
    std::iota(pos.begin(), pos.end(), 0);
    for (std::size_t i = 0; i < subs; ++i) {
      std::swap(pos[i], pos[i + rng.NextBelow(len - i)]);
    }
    std::vector<std::string> cand = ref;
    for (std::size_t i = 0; i < subs; ++i) cand[pos[i]] = world.synonyms[word_of[pos[i]]];
    corpus.references.push_back(std::move(ref));
    corpus.candidates.push_back(std::move(cand));
    corpus.substitutions.push_back(subs);
    corpus.human.push_back(1.0 - static_cast<double>(subs) /
                                     static_cast<double>(max_substitutions));
  }
  return corpus;
}

SegmentDataset MakeSyntheticDataset(const SynonymWorld& world, std::size_t segments,
                                    std::size_t systems, std::uint64_t seed) {
  if (segments == 0 || systems == 0 || world.words.empty()) {
    throw Error(ErrorKind::kInvalidInput, "synthetic dataset needs segments and systems");
  }
  SegmentDataset ds;
  std::vector<std::vector<std::size_t>> ref_words(segments);
  for (std::size_t s = 0; s < segments; ++s) {
    CounterRng rng(seed, s);
    const std::size_t len = 6 + rng.NextBelow(7);
    std::vector<std::string> words;
    for (std::size_t t = 0; t < len; ++t) {
      ref_words[s].push_back(rng.NextBelow(world.words.size()));
      words.push_back(world.words[ref_words[s].back()]);
    }
    ds.references.emplace(Padded(s, 4), JoinWords(words));
  }
  for (std::size_t m = 0; m < systems; ++m) {
    const std::string name = "sys" + Padded(m, 2);
    // Higher-numbered systems are better.
    const double quality = systems == 1 ? 0.5
                                        : static_cast<double>(m) /
                                              static_cast<double>(systems - 1);
    const double synonym_rate = 0.35 * (1.0 - quality);
    const double noise_rate = 0.30 * (1.0 - quality) + 0.02;
    for (std::size_t s = 0; s < segments; ++s) {
      CounterRng rng(seed ^ 0xA5A5A5A5ULL, m * segments + s);
      const auto& words = ref_words[s];
      std::vector<std::string> cand;
      double damage = 0.0;
      for (std::size_t idx : words) {
        const double u = rng.NextDouble();
        if (u < noise_rate) {
          cand.push_back(world.words[rng.NextBelow(world.words.size())]);
          damage += 1.0;
        } else if (u < noise_rate + synonym_rate) {
          cand.push_back(world.synonyms[idx]);
          damage += 0.3;
        } else {
          cand.push_back(world.words[idx]);
        }
      }
      const double human = 100.0 * (1.0 - damage / static_cast<double>(words.size())) +
                           8.0 * rng.NextGaussian();
      const std::string id = Padded(s, 4);
      ds.systems[name].emplace(id, JoinWords(cand));
      ds.human_segment[{name, id}] = std::round(human * 1e6) / 1e6;
    }
  }
  ds.Validate();
  return ds;
}

}  // namespace embscore
