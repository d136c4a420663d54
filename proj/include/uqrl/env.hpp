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

// Two small deterministic task families over a shared verb+object token
// vocabulary.
//
// KeyDoor: take the key, open the door, take the target object, in that
// order. Observation = (target, stage). Wrong actions cost a step; dropping
// the key undoes the first stage.
//
// Shop: a target product is a pattern over three binary attributes. The
// agent queries (jumps to a seeded default product with one attribute set),
// refines single attributes, and finally selects the product on screen. The
// score is the fraction of target attributes the selection matches.
// Observation = (target, page), where page is the product on screen or home.

#ifndef UQRL_ENV_HPP_
#define UQRL_ENV_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace uqrl {

enum class EnvKind { kKeyDoor, kShop };

std::string to_string(EnvKind k);
EnvKind parse_env_kind(std::string_view s);

struct Action {
  int verb = 0;
  int object = 0;
};

struct EnvState {
  EnvKind kind = EnvKind::kKeyDoor;
  std::uint64_t seed = 0;
  int observation = 0;
  int steps_taken = 0;
  int max_steps = 0;
  bool terminal = false;

  // Task instance and progress; observation is a function of these.
  int target = 0;
  int stage = 0;       // KeyDoor progress, 0..2
  int product = -1;    // Shop: attribute pattern on screen, -1 = home page
  int distractor = 0;  // Shop: pattern a query lands on before refinement
};

struct StepOutcome {
  int next_observation = 0;
  double reward = 0.0;
  bool done = false;
  bool success = false;
  double score = 0.0;
};

namespace keydoor {
inline constexpr int kTake = 0, kOpen = 1, kDrop = 2, kKey = 3, kDoor = 4;
inline constexpr int kFirstTarget = 5;
inline constexpr int kNumTargets = 5;
inline constexpr int kStages = 3;
}  // namespace keydoor

namespace shop {
inline constexpr int kQuery = 0, kRefine = 1, kSelect = 2;
inline constexpr int kFirstAttribute = 3;  // token 3 + 2*slot + value
inline constexpr int kSlots = 3;
inline constexpr int kPatterns = 1 << kSlots;
inline constexpr int kHomePage = kPatterns;
inline int attribute_token(int slot, int value) {
  return kFirstAttribute + 2 * slot + value;
}
}  // namespace shop

int default_max_steps(EnvKind k);
std::size_t num_states(EnvKind k);
std::size_t vocab_size(EnvKind k);
std::string_view token_name(EnvKind k, int token);
// Verb tokens lead an action; every other token is an object.
bool is_verb(EnvKind k, int token);

// Deterministic initial state for (kind, seed). max_steps <= 0 selects the
// environment default.
EnvState reset(EnvKind kind, std::uint64_t seed, int max_steps = 0);

// Advances `state` in place. Throws StateError on a terminal state.
StepOutcome step(EnvState& state, Action action);

struct TraceRecord {
  std::uint64_t seed = 0;
  int step_index = 0;
  int observation = 0;
  int verb = 0;
  int object = 0;
  StepOutcome outcome;
};

// One JSONL line (no trailing newline):
// {"seed","step_index","observation","verb","object","reward","done",
//  "success","score"} with verb/object as token names.
std::string trace_to_jsonl(EnvKind kind, const TraceRecord& r);

}  // namespace uqrl

#endif  // UQRL_ENV_HPP_
