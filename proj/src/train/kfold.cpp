#include "seqemo/train/kfold.hpp"

#include <algorithm>
#include <map>

namespace seqemo {

namespace {

void assign_stratified(const std::vector<int64_t>& labels, int64_t num_classes,
                       int64_t k, Rng& rng, std::vector<int64_t>& assignment) {
  std::vector<std::vector<int64_t>> by_class(
      static_cast<size_t>(num_classes));
  for (size_t i = 0; i < labels.size(); ++i)
    by_class[static_cast<size_t>(labels[i])].push_back(
        static_cast<int64_t>(i));
  for (int64_t c = 0; c < num_classes; ++c) {
    auto& idx = by_class[static_cast<size_t>(c)];
    if (static_cast<int64_t>(idx.size()) < k)
      throw ConfigError(cat("class ", c, " has ", idx.size(),
                            " items, need at least ", k, " for ", k,
                            " folds"));
    rng.shuffle(idx);
    // Deal round-robin; the per-class starting fold rotates so no fold
    // collects every class's remainder.
    for (size_t i = 0; i < idx.size(); ++i)
      assignment[static_cast<size_t>(idx[i])] =
          (static_cast<int64_t>(i) + c) % k;
  }
}

void assign_by_speaker(const std::vector<std::string>& speakers, int64_t k,
                       Rng& rng, std::vector<int64_t>& assignment) {
  std::map<std::string, std::vector<int64_t>> groups;
  for (size_t i = 0; i < speakers.size(); ++i)
    groups[speakers[i]].push_back(static_cast<int64_t>(i));
  if (static_cast<int64_t>(groups.size()) < k)
    throw ConfigError(cat("only ", groups.size(),
                          " distinct speakers, need at least ", k, " for ", k,
                          " folds"));

  std::vector<const std::vector<int64_t>*> order;
  order.reserve(groups.size());
  for (const auto& [name, idx] : groups) order.push_back(&idx);
  rng.shuffle(order);
  // Largest groups first, then greedily into the currently smallest fold.
  // Equal-sized groups keep their shuffled order, so the seed still matters.
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) {
                     return a->size() > b->size();
                   });

  std::vector<int64_t> load(static_cast<size_t>(k), 0);
  for (const auto* group : order) {
    int64_t target = 0;
    for (int64_t f = 1; f < k; ++f)
      if (load[static_cast<size_t>(f)] < load[static_cast<size_t>(target)])
        target = f;
    for (int64_t i : *group) assignment[static_cast<size_t>(i)] = target;
    load[static_cast<size_t>(target)] +=
        static_cast<int64_t>(group->size());
  }
}

}  // namespace

std::vector<FoldSplit> kfold_split(const std::vector<int64_t>& labels,
                                   const std::vector<std::string>& speakers,
                                   int64_t num_classes, FoldPlan& plan,
                                   Rng& rng) {
  if (plan.k < 2)
    throw ConfigError(cat("need at least 2 folds, got ", plan.k));
  if (labels.empty()) throw DataError("cannot split an empty dataset");
  if (num_classes < 1)
    throw ConfigError(cat("num_classes must be positive, got ", num_classes));
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw DataError(cat("label ", labels[i], " at index ", i,
                          " outside [0, ", num_classes, ")"));
  if (plan.mode == FoldMode::speaker_grouped &&
      speakers.size() != labels.size())
    throw DataError(cat("speaker list covers ", speakers.size(),
                        " items, labels cover ", labels.size()));

  plan.assignment.assign(labels.size(), -1);
  if (plan.mode == FoldMode::stratified_random) {
    assign_stratified(labels, num_classes, plan.k, rng, plan.assignment);
  } else {
    assign_by_speaker(speakers, plan.k, rng, plan.assignment);
  }

  std::vector<FoldSplit> splits(static_cast<size_t>(plan.k));
  for (size_t i = 0; i < plan.assignment.size(); ++i) {
    const int64_t f = plan.assignment[i];
    for (int64_t g = 0; g < plan.k; ++g) {
      auto& split = splits[static_cast<size_t>(g)];
      (g == f ? split.test : split.train).push_back(static_cast<int64_t>(i));
    }
  }
  for (int64_t f = 0; f < plan.k; ++f)
    if (splits[static_cast<size_t>(f)].test.empty())
      throw ConfigError(cat("fold ", f, " received no items"));
  return splits;
}

}  // namespace seqemo
