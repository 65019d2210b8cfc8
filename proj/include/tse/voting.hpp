#pragma once

// Social choice rules over strict rankings and a brute-force search for
// spawn manipulations: k copies of one ballot added to a profile that move
// the winner to an alternative that ballot ranks higher.
//
// Ties break lexicographically on alternative index (earlier wins).

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tse::voting {

enum class Rule { plurality, borda, copeland, pairwise_majority };

Rule parse_rule(std::string_view name);
const char* to_string(Rule r);

using Ballot = std::vector<std::size_t>;  ///< alternative indices, most preferred first

struct Profile {
  std::vector<std::string> alternatives;
  std::vector<Ballot> ballots;

  void validate() const;
};

/// Winner of `profile` plus `extra_count` copies of `extra` (if any).
std::size_t winner(Rule rule, const Profile& profile, const Ballot* extra = nullptr,
                   std::size_t extra_count = 0);

struct Manipulation {
  bool found = false;
  Ballot ballot;
  std::size_t k = 0;
  std::size_t old_winner = 0;
  std::size_t new_winner = 0;
};

/// Searches k = 1..max_k (outer) and all ballots in lexicographic order
/// (inner). max_k defaults to (|A| - 1) n.
Manipulation spawn_manipulation_search(Rule rule, const Profile& profile,
                                       std::optional<std::size_t> max_k = std::nullopt);

/// True when adding k copies of `ballot` changes the winner to one the ballot
/// strictly prefers.
bool is_manipulation(Rule rule, const Profile& profile, const Ballot& ballot, std::size_t k);

/// Re-runs the rule on a certificate and checks both claimed winners.
bool replay(Rule rule, const Profile& profile, const Manipulation& m);

}  // namespace tse::voting
