#pragma once

// Bounded distinguishing game between the two root states of an explored
// applicative chain.
//
// Round k of the game corresponds to partition-refinement level k+1 of the
// chain: the base partition by directly observable labels (tt, ff, types) is
// free, and each round buys one refinement on top of it, so two states are
// separated within k rounds iff refinement splits them within k+1 levels.  A
// mismatch already visible at level 1 (an eval-mass difference) still costs
// the one move that reveals it.  A DISTINGUISHED verdict comes with a
// replayable trace walking
// from the roots down to an immediately observable difference: each move
// names the label played, the successor class whose probability differs, and
// both probabilities; the next move explains why that class is legitimate,
// until the difference is a direct label mismatch.
//
// Raw trace probabilities would not suffice here: there are pairs (e.g. a
// function flipping its coin per call vs. a choice between two constant
// functions) whose every label sequence has equal probability, yet the
// class-probability refinement splits them.
//
// A "not distinguished" verdict is exhaustive only when the reachable state
// space was fully explored and refinement reached its fixpoint; otherwise it
// holds up to the reported number of rounds and the basis actually used.

#include <cstdint>
#include <string>
#include <vector>

#include "linlam/applmc.hpp"

namespace linlam {

struct GameMove {
    std::string left_state, right_state;
    std::string label;
    std::vector<std::string> cls; // successor class with differing mass
    double left_prob = 0, right_prob = 0;
    std::string left_exact, right_exact; // exact rationals in classical modes
};

struct GameResult {
    bool distinguished = false;
    int rounds = 0;          // level at which the roots split; otherwise the
                             // deepest level checked
    bool exhaustive = false; // fixpoint on a fully explored space
    std::vector<GameMove> trace;
    std::uint64_t basis_fingerprint = 0;
    std::size_t basis_entries = 0;
};

// max_rounds < 0: limited only by what the exploration supports.
GameResult game_distinguish(const Explored<Rational>& ex, const TestBasis& basis,
                            int max_rounds = -1, double tol = kLmcDefaultTol);
GameResult game_distinguish(const Explored<double>& ex, const TestBasis& basis,
                            int max_rounds = -1, double tol = kLmcDefaultTol);

} // namespace linlam
