#include "tse/voting.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "tse/core.hpp"

namespace tse::voting {

namespace {

std::size_t rank_of(const Ballot& b, std::size_t a) {
  return static_cast<std::size_t>(std::find(b.begin(), b.end(), a) - b.begin());
}

// Index of the maximal score; the earliest index wins ties.
template <class T>
std::size_t argmax(const std::vector<T>& s) {
  return static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
}

// wins[a][b] = number of voters ranking a above b.
std::vector<std::vector<long>> pairwise(std::size_t m, const Profile& p, const Ballot* extra,
                                        std::size_t count) {
  std::vector<std::vector<long>> n(m, std::vector<long>(m, 0));
  auto add = [&](const Ballot& b, long w) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) n[b[i]][b[j]] += w;
  };
  for (const auto& b : p.ballots) add(b, 1);
  if (extra && count > 0) add(*extra, static_cast<long>(count));
  return n;
}

}  // namespace

Rule parse_rule(std::string_view name) {
  if (name == "plurality") return Rule::plurality;
  if (name == "borda") return Rule::borda;
  if (name == "copeland") return Rule::copeland;
  if (name == "pairwise-majority" || name == "pairwise_majority") return Rule::pairwise_majority;
  throw ConfigError("unknown voting rule '" + std::string(name) + "'");
}

const char* to_string(Rule r) {
  switch (r) {
    case Rule::plurality: return "plurality";
    case Rule::borda: return "borda";
    case Rule::copeland: return "copeland";
    case Rule::pairwise_majority: return "pairwise-majority";
  }
  return "?";
}

void Profile::validate() const {
  const std::size_t m = alternatives.size();
  if (m == 0) throw ConfigError("voting profile needs at least one alternative");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (alternatives[i] == alternatives[j])
        throw ConfigError("duplicate alternative '" + alternatives[i] + "'");
  for (std::size_t v = 0; v < ballots.size(); ++v) {
    const auto& b = ballots[v];
    std::vector<bool> seen(m, false);
    if (b.size() != m) throw ConfigError("ballot " + std::to_string(v) + " is not a full ranking");
    for (std::size_t a : b) {
      if (a >= m || seen[a])
        throw ConfigError("ballot " + std::to_string(v) + " is not a permutation");
      seen[a] = true;
    }
  }
}

std::size_t winner(Rule rule, const Profile& p, const Ballot* extra, std::size_t count) {
  const std::size_t m = p.alternatives.size();
  if (m == 0) throw ConfigError("voting profile needs at least one alternative");
  const long w = static_cast<long>(count);
  switch (rule) {
    case Rule::plurality: {
      std::vector<long> s(m, 0);
      for (const auto& b : p.ballots) ++s[b[0]];
      if (extra) s[(*extra)[0]] += w;
      return argmax(s);
    }
    case Rule::borda: {
      std::vector<long> s(m, 0);
      auto add = [&](const Ballot& b, long weight) {
        for (std::size_t i = 0; i < m; ++i) s[b[i]] += weight * static_cast<long>(m - 1 - i);
      };
      for (const auto& b : p.ballots) add(b, 1);
      if (extra) add(*extra, w);
      return argmax(s);
    }
    case Rule::copeland: {
      const auto n = pairwise(m, p, extra, count);
      // Two points per pairwise win, one per tie.
      std::vector<long> s(m, 0);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          if (a != b) s[a] += n[a][b] > n[b][a] ? 2 : (n[a][b] == n[b][a] ? 1 : 0);
      return argmax(s);
    }
    case Rule::pairwise_majority: {
      const auto n = pairwise(m, p, extra, count);
      for (std::size_t a = 0; a < m; ++a) {
        bool beats_all = true;
        for (std::size_t b = 0; b < m && beats_all; ++b)
          if (a != b && n[a][b] <= n[b][a]) beats_all = false;
        if (beats_all) return a;
      }
      // No Condorcet winner: minimax (smallest worst pairwise defeat).
      std::vector<long> worst(m, 0);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          if (a != b) worst[a] = std::max(worst[a], n[b][a] - n[a][b]);
      std::vector<long> neg(m);
      for (std::size_t a = 0; a < m; ++a) neg[a] = -worst[a];
      return argmax(neg);
    }
  }
  return 0;
}

bool is_manipulation(Rule rule, const Profile& p, const Ballot& ballot, std::size_t k) {
  const std::size_t before = winner(rule, p);
  const std::size_t after = winner(rule, p, &ballot, k);
  return after != before && rank_of(ballot, after) < rank_of(ballot, before);
}

Manipulation spawn_manipulation_search(Rule rule, const Profile& p,
                                       std::optional<std::size_t> max_k) {
  p.validate();
  const std::size_t m = p.alternatives.size();
  Manipulation result;
  result.old_winner = winner(rule, p);
  result.new_winner = result.old_winner;
  if (m < 2) return result;
  const std::size_t limit = max_k.value_or((m - 1) * p.ballots.size());

  std::vector<Ballot> all;
  Ballot b(m);
  std::iota(b.begin(), b.end(), std::size_t{0});
  do all.push_back(b);
  while (std::next_permutation(b.begin(), b.end()));

  for (std::size_t k = 1; k <= limit; ++k) {
    for (const auto& ballot : all) {
      const std::size_t w = winner(rule, p, &ballot, k);
      if (w != result.old_winner && rank_of(ballot, w) < rank_of(ballot, result.old_winner)) {
        result.found = true;
        result.ballot = ballot;
        result.k = k;
        result.new_winner = w;
        return result;
      }
    }
  }
  return result;
}

bool replay(Rule rule, const Profile& p, const Manipulation& m) {
  if (!m.found) return true;
  return winner(rule, p) == m.old_winner && winner(rule, p, &m.ballot, m.k) == m.new_winner &&
         is_manipulation(rule, p, m.ballot, m.k);
}

}  // namespace tse::voting
