// Copyright 2026 The uqrl Authors
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

#include "uqrl/env.hpp"

#include <array>

#include "json.hpp"
#include "uqrl/errors.hpp"
#include "uqrl/rng.hpp"

namespace uqrl {
namespace {

constexpr std::array<std::string_view, keydoor::kFirstTarget + keydoor::kNumTargets> kKeyDoorTokens = {
    "take", "open", "drop", "key", "door", "apple", "book", "cup", "pen", "mug"};

constexpr std::array<std::string_view, 9> kShopTokens = {
    "query", "refine", "select", "small", "large",
    "red",   "blue",   "cotton", "wool"};
static_assert(kShopTokens.size() == shop::kFirstAttribute + 2 * shop::kSlots);

int keydoor_observation(const EnvState& s) {
  return s.target * keydoor::kStages + s.stage;
}

int shop_observation(const EnvState& s) {
  const int page = s.product < 0 ? shop::kHomePage : s.product;
  return s.target * (shop::kPatterns + 1) + page;
}

int matched_attributes(int a, int b) {
  int n = 0;
  for (int slot = 0; slot < shop::kSlots; ++slot)
    n += ((a >> slot) & 1) == ((b >> slot) & 1);
  return n;
}

// Decodes an attribute token into (slot, value); false for non-attributes.
bool decode_attribute(int token, int& slot, int& value) {
  const int a = token - shop::kFirstAttribute;
  if (a < 0 || a >= 2 * shop::kSlots) return false;
  slot = a / 2;
  value = a % 2;
  return true;
}

int with_attribute(int pattern, int slot, int value) {
  return (pattern & ~(1 << slot)) | (value << slot);
}

StepOutcome step_keydoor(EnvState& s, Action a) {
  using namespace keydoor;
  StepOutcome out;
  if (s.stage == 0 && a.verb == kTake && a.object == kKey) {
    s.stage = 1;
  } else if (s.stage == 1 && a.verb == kOpen && a.object == kDoor) {
    s.stage = 2;
  } else if (s.stage >= 1 && a.verb == kDrop && a.object == kKey) {
    s.stage = 0;
  } else if (s.stage == 2 && a.verb == kTake &&
             a.object == kFirstTarget + s.target) {
    out.done = out.success = true;
    out.score = out.reward = 1.0;
  }
  return out;
}

StepOutcome step_shop(EnvState& s, Action a) {
  using namespace shop;
  StepOutcome out;
  int slot = 0;
  int value = 0;
  const bool attr = decode_attribute(a.object, slot, value);
  if (a.verb == kQuery && attr) {
    s.product = with_attribute(s.distractor, slot, value);
  } else if (s.product >= 0 && a.verb == kRefine && attr) {
    s.product = with_attribute(s.product, slot, value);
  } else if (s.product >= 0 && a.verb == kSelect) {
    out.done = true;
    const int matched = matched_attributes(s.product, s.target);
    out.score = static_cast<double>(matched) / kSlots;
    out.success = matched == kSlots;
    out.reward = out.success ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace

std::string to_string(EnvKind k) {
  return k == EnvKind::kKeyDoor ? "keydoor" : "shop";
}

EnvKind parse_env_kind(std::string_view s) {
  if (s == "keydoor") return EnvKind::kKeyDoor;
  if (s == "shop") return EnvKind::kShop;
  throw InvalidConfig("unknown environment '" + std::string(s) + "'");
}

int default_max_steps(EnvKind k) { return k == EnvKind::kKeyDoor ? 12 : 8; }

std::size_t num_states(EnvKind k) {
  return k == EnvKind::kKeyDoor
             ? keydoor::kNumTargets * keydoor::kStages
             : shop::kPatterns * (shop::kPatterns + 1);
}

std::size_t vocab_size(EnvKind k) {
  return k == EnvKind::kKeyDoor ? kKeyDoorTokens.size() : kShopTokens.size();
}

std::string_view token_name(EnvKind k, int token) {
  if (token < 0 || static_cast<std::size_t>(token) >= vocab_size(k))
    throw InvalidInput("token id outside vocabulary");
  return k == EnvKind::kKeyDoor ? kKeyDoorTokens[token] : kShopTokens[token];
}

bool is_verb(EnvKind k, int token) {
  return k == EnvKind::kKeyDoor ? token < keydoor::kKey
                                : token < shop::kFirstAttribute;
}

EnvState reset(EnvKind kind, std::uint64_t seed, int max_steps) {
  EnvState s;
  s.kind = kind;
  s.seed = seed;
  s.max_steps = max_steps > 0 ? max_steps : default_max_steps(kind);
  if (kind == EnvKind::kKeyDoor) {
    s.target = static_cast<int>(seed % keydoor::kNumTargets);
    s.observation = keydoor_observation(s);
  } else {
    s.target = static_cast<int>(seed % shop::kPatterns);
    // Distractor never equals the target, so a bare query is never enough.
    const int offset = 1 + static_cast<int>(mix64(seed) % (shop::kPatterns - 1));
    s.distractor = (s.target + offset) % shop::kPatterns;
    s.observation = shop_observation(s);
  }
  return s;
}

StepOutcome step(EnvState& state, Action action) {
  if (state.terminal) throw StateError("environment episode already finished");
  const std::size_t v = vocab_size(state.kind);
  if (action.verb < 0 || static_cast<std::size_t>(action.verb) >= v ||
      action.object < 0 || static_cast<std::size_t>(action.object) >= v)
    throw InvalidInput("action token outside vocabulary");
  StepOutcome out = state.kind == EnvKind::kKeyDoor ? step_keydoor(state, action)
                                                    : step_shop(state, action);
  ++state.steps_taken;
  if (!out.done && state.steps_taken >= state.max_steps) {
    out.done = true;
    out.success = false;
    out.score = 0.0;
    out.reward = 0.0;
  }
  state.terminal = out.done;
  state.observation = state.kind == EnvKind::kKeyDoor ? keydoor_observation(state)
                                                      : shop_observation(state);
  out.next_observation = state.observation;
  return out;
}

std::string trace_to_jsonl(EnvKind kind, const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  j["step_index"] = r.step_index;
  j["observation"] = r.observation;
  j["verb"] = token_name(kind, r.verb);
  j["object"] = token_name(kind, r.object);
  j["reward"] = r.outcome.reward;
  j["done"] = r.outcome.done;
  j["success"] = r.outcome.success;
  j["score"] = r.outcome.score;
  return j.dump();
}

}  // namespace uqrl
