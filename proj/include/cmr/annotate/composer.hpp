// Copyright 2026 The CMR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cmr/core/types.hpp"
#include "cmr/error.hpp"

namespace cmr::annotate {

inline const std::array<std::string, 4> kPersonSynonyms = {"A person", "Someone", "Somebody", "A pedestrian"};

/// Word-level alternates used to expand sentence annotations. Keys are the
/// surface words that appear in sentences (gerunds, class names).
class SynonymTable {
 public:
  SynonymTable() = default;
  explicit SynonymTable(std::map<std::string, std::vector<std::string>> words) : words_(std::move(words)) {
    validate();
  }

  /// Non-canonical default list of common motion and context alternates.
  static SynonymTable defaults() {
    return SynonymTable({
        {"walking", {"strolling"}},         {"running", {"jogging"}},
        {"standing", {"waiting"}},          {"waving", {"gesturing"}},
        {"sitting", {"seated"}},            {"jumping", {"hopping"}},
        {"stepping forward", {"advancing"}}, {"road", {"street"}},
        {"sidewalk", {"footpath"}},         {"crosswalk", {"zebra crossing"}},
        {"pavement", {"paved area"}},       {"car", {"vehicle"}},
        {"bus", {"coach"}},                 {"truck", {"lorry"}},
        {"bicycle", {"bike"}},              {"building", {"house"}},
        {"police car", {"patrol car"}},     {"fire truck", {"fire engine"}},
        {"ambulance", {"emergency vehicle"}}, {"e-scooter", {"electric scooter"}},
        {"pole", {"post"}},                 {"tree", {"plant"}},
        {"traffic light", {"signal"}},      {"driveway", {"drive"}},
        {"terrain", {"ground"}},            {"parking", {"parking lot"}},
        {"bench", {"seat"}},                {"curb", {"kerb"}},
        {"bike lane", {"cycle lane"}},      {"grass", {"lawn"}},
    });
  }

  const std::vector<std::string>& alternates(const std::string& word) const {
    static const std::vector<std::string> kNone;
    auto it = words_.find(word);
    return it == words_.end() ? kNone : it->second;
  }
  const std::map<std::string, std::vector<std::string>>& words() const { return words_; }
  const std::array<std::string, 4>& person_synonyms() const { return kPersonSynonyms; }

  /// The word -> alternate relation must not contain cycles.
  void validate() const {
    std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
    std::function<void(const std::string&)> visit = [&](const std::string& w) {
      int& s = state[w];
      if (s == 1) fail(ErrorCode::kInvalidConfig, "synonym table contains a cycle through '" + w + "'");
      if (s == 2) return;
      s = 1;
      for (const auto& alt : alternates(w)) visit(alt);
      state[w] = 2;
    };
    for (const auto& [w, _] : words_) visit(w);
  }

 private:
  std::map<std::string, std::vector<std::string>> words_;
};

inline std::string relation_phrase(Relation r) {
  switch (r) {
    case Relation::kOn: return "on";
    case Relation::kBehind: return "behind";
    case Relation::kInFrontOf: return "in front of";
    case Relation::kNextTo: return "next to";
  }
  return "on";
}

inline std::string indefinite_article(const std::string& noun) {
  if (noun.empty()) return "a";
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(noun.front())));
  return std::string("aeiou").find(c) != std::string::npos ? "an" : "a";
}

namespace detail {
template <typename T, typename Key>
std::vector<T> dedup(std::span<const T> items, Key key) {
  std::vector<T> out;
  std::set<decltype(key(items.front()))> seen;
  for (const T& it : items)
    if (seen.insert(key(it)).second) out.push_back(it);
  return out;
}
}  // namespace detail

/// "{motion} {context}" for every motion x context-class pair; motion rank
/// is the major order. Duplicate context classes collapse.
inline std::vector<std::string> compose_simple(std::span<const std::string> motions,
                                               std::span<const ContextLabel> contexts) {
  if (motions.empty() || contexts.empty()) fail(ErrorCode::kEmptyInput, "simple labels need motions and contexts");
  const auto ms = detail::dedup<std::string>(motions, [](const std::string& s) { return s; });
  const auto cs = detail::dedup<ContextLabel>(contexts, [](const ContextLabel& c) { return c.class_name; });
  std::vector<std::string> out;
  for (const auto& m : ms)
    for (const auto& c : cs) out.push_back(m + " " + c.class_name);
  return out;
}

/// "<person> is <motion> <relation> <a|an> <class>" over all person synonyms
/// and motion/context pairs, then expanded with every combination of word
/// alternates for the motion and the class.
inline std::vector<std::string> compose_sentences(std::span<const std::string> motions,
                                                  std::span<const ContextLabel> contexts, const SynonymTable& syn) {
  if (motions.empty() || contexts.empty()) fail(ErrorCode::kEmptyInput, "sentences need motions and contexts");
  const auto ms = detail::dedup<std::string>(motions, [](const std::string& s) { return s; });
  const auto cs = detail::dedup<ContextLabel>(contexts, [](const ContextLabel& c) { return c; });
  std::vector<std::string> out;
  for (const auto& m : ms) {
    std::vector<std::string> m_forms{m};
    for (const auto& alt : syn.alternates(m)) m_forms.push_back(alt);
    for (const auto& c : cs) {
      std::vector<std::string> c_forms{c.class_name};
      for (const auto& alt : syn.alternates(c.class_name)) c_forms.push_back(alt);
      const std::string rel = relation_phrase(c.relation);
      for (const auto& person : syn.person_synonyms())
        for (const auto& mf : m_forms)
          for (const auto& cf : c_forms)
            out.push_back(person + " is " + mf + " " + rel + " " + indefinite_article(cf) + " " + cf);
    }
  }
  return out;
}

/// Fills simple and sentence annotations from motions and contexts. Samples
/// without motions or contexts keep empty annotation lists.
inline AnnotationSet compose_annotations(std::vector<std::string> motions, std::vector<ContextLabel> contexts,
                                         const SynonymTable& syn) {
  AnnotationSet a;
  a.motions = std::move(motions);
  a.contexts = std::move(contexts);
  if (!a.motions.empty() && !a.contexts.empty()) {
    a.simple = compose_simple(a.motions, a.contexts);
    a.sentences = compose_sentences(a.motions, a.contexts, syn);
  }
  return a;
}

struct AnnotationCounts {
  size_t samples = 0;
  size_t motion = 0;
  size_t context = 0;
  size_t combination = 0;
  size_t sentence = 0;

  friend bool operator==(const AnnotationCounts&, const AnnotationCounts&) = default;
};

inline AnnotationCounts annotation_counts(std::span<const AnnotationSet> split) {
  AnnotationCounts c;
  for (const auto& a : split) {
    ++c.samples;
    c.motion += a.motions.size();
    c.context += a.contexts.size();
    c.combination += a.simple.size();
    c.sentence += a.sentences.size();
  }
  return c;
}

}  // namespace cmr::annotate
