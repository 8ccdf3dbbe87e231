#include <algorithm>
#include <cmath>

#include "patenthan/corpus.hpp"
#include "patenthan/error.hpp"
#include "patenthan/rng.hpp"

namespace patenthan {

namespace {

std::array<std::vector<std::size_t>, 2> members_by_class(std::span<const ValueClass> labels) {
  std::array<std::vector<std::size_t>, 2> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[class_index(labels[i])].push_back(i);
  return members;
}

Split partition(std::span<const ValueClass> labels, double train_fraction, std::uint64_t seed,
                bool require_every_class) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidInput("train fraction must lie strictly between 0 and 1");
  }
  auto members = members_by_class(labels);
  Rng rng(seed);
  Split split;
  for (int c = 0; c < 2; ++c) {
    auto& idx = members[c];
    if (idx.empty()) {
      if (require_every_class) {
        throw InvalidInput(std::string("class ") + std::string(to_string(static_cast<ValueClass>(c))) +
                           " has no members; cannot stratify");
      }
      continue;
    }
    rng.shuffle(std::span(idx));
    const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * train_fraction));
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace

Split stratified_split(std::span<const ValueClass> labels, double train_fraction, std::uint64_t seed) {
  return partition(labels, train_fraction, seed, true);
}

Split stratified_split_lenient(std::span<const ValueClass> labels, double train_fraction, std::uint64_t seed) {
  return partition(labels, train_fraction, seed, false);
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const ValueClass> labels, std::size_t k,
                                                       std::uint64_t seed) {
  if (k < 2) throw InvalidInput("k must be >= 2");
  auto members = members_by_class(labels);
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t next = 0;
  for (int c = 0; c < 2; ++c) {
    auto& idx = members[c];
    if (idx.empty()) continue;
    if (idx.size() < k) {
      throw InvalidInput(std::string("class ") + std::string(to_string(static_cast<ValueClass>(c))) + " has " +
                         std::to_string(idx.size()) + " members, fewer than k=" + std::to_string(k));
    }
    rng.shuffle(std::span(idx));
    // Round-robin keeps each fold within one member of class_size / k; the
    // running offset balances total fold sizes across classes.
    for (std::size_t i : idx) folds[next++ % k].push_back(i);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace patenthan
