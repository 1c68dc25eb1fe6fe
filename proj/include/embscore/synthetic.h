#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "embscore/dataset.h"

namespace embscore {

// A static embedding world of `vocab_size` base words "w00", "w01", ... each
// paired with a synonym "s00", "s01", ... whose vector has cosine exactly
// `synonym_cosine` with its partner. Base vectors are random unit vectors.
struct SynonymWorld {
  std::vector<std::string> words;
  std::vector<std::string> synonyms;
  std::map<std::string, std::vector<double>> table;
};

SynonymWorld MakeSynonymWorld(std::size_t vocab_size, std::size_t dim,
                              double synonym_cosine, std::uint64_t seed);

// References of random base words; each candidate replaces a uniformly drawn
// number (0..max_substitutions) of distinct positions with their synonyms.
// Human score = 1 - substitutions / max_substitutions.
struct SubstitutionCorpus {
  std::vector<std::vector<std::string>> references;
  std::vector<std::vector<std::string>> candidates;
  std::vector<std::size_t> substitutions;
  std::vector<double> human;
};

SubstitutionCorpus MakeSubstitutionCorpus(const SynonymWorld& world,
                                          std::size_t sentences,
                                          std::size_t max_substitutions,
                                          std::size_t min_length,
                                          std::size_t max_length, std::uint64_t seed);

// A segment dataset with `systems` systems of increasing quality over
// `segments` references. Each system substitutes synonyms and drops in
// random words at its own rate; human scores track the damage plus noise.
SegmentDataset MakeSyntheticDataset(const SynonymWorld& world, std::size_t segments,
                                    std::size_t systems, std::uint64_t seed);

std::string JoinWords(const std::vector<std::string>& words);

}  // namespace embscore
