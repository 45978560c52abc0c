#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "homesim/knowledge/knowledge.hpp"
#include "homesim/runtime/rng.hpp"

namespace homesim::testing {

struct PhraseCorpus {
  std::vector<knowledge::Document> documents;
  std::vector<std::string> phrases;  // phrases[i] occurs only in documents[i]
};

/// Short smart-home notes, each carrying one phrase of invented words that no
/// other document shares. Filler comes from a fixed domain vocabulary.
inline PhraseCorpus phrase_corpus(std::size_t count, std::uint64_t seed, std::size_t phrase_words = 5,
                                  std::size_t filler_tokens = 16) {
  static const std::vector<std::string> vocab{
      "thermostat", "camera",   "motion",   "sensor",     "zigbee",      "wifi",     "router",
      "firmware",   "update",   "door",     "lock",       "kitchen",     "bedroom",  "telemetry",
      "packet",     "device",   "smart",    "home",       "light",       "bulb",     "plug",
      "energy",     "protocol", "matter",   "thread",     "hub",         "alarm",    "window",
      "temperature", "humidity", "schedule", "resident",  "network",     "traffic",  "gateway",
      "mqtt",       "broker",   "cloud",    "api",        "token"};
  static const std::vector<std::string> syllables{"ka",  "zor", "vex", "qui", "tal", "bri", "met", "plo",
                                                  "dun", "sae", "rik", "gom", "fel", "wy",  "nux", "oth"};
  RngStream rng(seed);
  PhraseCorpus out;
  std::set<std::string> used;
  for (std::size_t d = 0; d < count; ++d) {
    std::string phrase;
    for (std::size_t w = 0; w < phrase_words; ++w) {
      std::string word;
      do {
        word.clear();
        for (int s = 0; s < 3; ++s) word += syllables[rng.uniform_index(syllables.size())];
      } while (!used.insert(word).second);
      phrase += (w ? " " : "") + word;
    }
    const auto at = rng.uniform_index(filler_tokens + 1);
    std::string text;
    for (std::size_t t = 0; t <= filler_tokens; ++t) {
      if (t == at) text += phrase + " ";
      if (t < filler_tokens) text += vocab[rng.uniform_index(vocab.size())] + " ";
    }
    knowledge::Document doc;
    doc.id = "note_" + std::to_string(d);
    doc.content = text;
    out.documents.push_back(std::move(doc));
    out.phrases.push_back(std::move(phrase));
  }
  return out;
}

}  // namespace homesim::testing
