#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "horizon/envgen.hpp"
#include "horizon/io.hpp"
#include "horizon/mdp.hpp"
#include "horizon/policy.hpp"

using namespace horizon;

namespace {

// 0 -a0-> 1 (r=1), 0 -a1-> 0 (r=0); 1 is terminal.
TabularMdp two_state() {
  return TabularMdp(2, 2, 3, 0, {1, 0, 1, 1}, {1.0, 0.0, 0.0, 0.0}, {0, 1});
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("horizon_test_" + name);
}

}  // namespace

TEST(Validate, WellFormedMdpHasNoViolations) { EXPECT_TRUE(validate(two_state()).empty()); }

TEST(Validate, OutOfRangeTransitionIsReported) {
  const TabularMdp mdp(2, 2, 3, 0, {2, 0, 1, 1}, {1.0, 0.0, 0.0, 0.0}, {0, 1});
  const auto v = validate(mdp);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::transition_out_of_range);
  EXPECT_EQ(v[0].state, 0u);
  EXPECT_EQ(v[0].action, 0u);
}

TEST(Validate, TerminalRewardIsReported) {
  const TabularMdp mdp(2, 2, 3, 0, {1, 0, 1, 1}, {1.0, 0.0, 0.5, 0.0}, {0, 1});
  const auto v = validate(mdp);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::terminal_reward);
  EXPECT_EQ(v[0].state, 1u);
  EXPECT_EQ(v[0].action, 0u);
}

TEST(Validate, NonFiniteRewardAndNonAbsorbingTerminal) {
  const TabularMdp mdp(2, 1, 1, 0, {1, 0}, {NAN, 0.0}, {0, 1});
  const auto v = validate(mdp);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].kind, Violation::Kind::nonfinite_reward);
  EXPECT_EQ(v[1].kind, Violation::Kind::terminal_not_absorbing);
}

TEST(Validate, IsIdempotent) {
  const TabularMdp mdp(2, 2, 3, 0, {2, 0, 1, 1}, {1.0, 0.0, 0.5, 0.0}, {0, 1});
  EXPECT_EQ(validate(mdp).size(), validate(mdp).size());
}

TEST(TabularMdp, ConstructorRejectsBadShapes) {
  EXPECT_THROW(TabularMdp(0, 1, 1, 0, {}, {}, {}), PreconditionError);
  EXPECT_THROW(TabularMdp(2, 2, 1, 2, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0}), PreconditionError);
  EXPECT_THROW(TabularMdp(2, 2, 1, 0, {0, 0, 0}, {0, 0, 0, 0}, {0, 0}), SizeError);
  EXPECT_THROW(TabularMdp(1, 1, 1, 0, {0}, {0}, {0}, 0.0), PreconditionError);
}

TEST(Shaping, ZeroPotentialKeepsRewards) {
  const TabularMdp mdp = make_dense_chain(4, 2);
  EXPECT_EQ(apply_shaping(mdp, {std::vector<double>(mdp.num_states(), 0.0)}).rewards(),
            mdp.rewards());
}

TEST(Shaping, ConstantPotentialTelescopes) {
  const TabularMdp mdp = make_dense_chain(4, 2);
  EXPECT_EQ(apply_shaping(mdp, {std::vector<double>(mdp.num_states(), 3.5)}).rewards(),
            mdp.rewards());
}

TEST(Shaping, NegativeDistanceShiftsRewardsByOne) {
  // Chain 0 - 1 - 2 with 2 the absorbing goal; action 0 moves left, 1 right.
  const TabularMdp mdp(3, 2, 4, 0, {0, 1, 0, 2, 2, 2}, {0, 0, 0, 1, 0, 0}, {0, 0, 1});
  const TabularMdp shaped = apply_shaping(mdp, {{-2.0, -1.0, 0.0}});
  EXPECT_DOUBLE_EQ(shaped.reward(0, 0), 0.0);   // stays at distance 2
  EXPECT_DOUBLE_EQ(shaped.reward(0, 1), 1.0);   // one step closer
  EXPECT_DOUBLE_EQ(shaped.reward(1, 0), -1.0);  // one step away
  EXPECT_DOUBLE_EQ(shaped.reward(1, 1), 2.0);   // closer plus the goal reward
  EXPECT_DOUBLE_EQ(shaped.reward(2, 0), 0.0);   // terminal rows untouched
  EXPECT_TRUE(validate(shaped).empty());
}

TEST(Shaping, RejectsWrongSizeOrNonFinitePotential) {
  const TabularMdp mdp = two_state();
  EXPECT_THROW(apply_shaping(mdp, {{0.0}}), PreconditionError);
  EXPECT_THROW(apply_shaping(mdp, {{0.0, INFINITY}}), PreconditionError);
}

TEST(Io, BinaryRoundTripIsBitIdentical) {
  for (const TabularMdp& mdp : {make_needle_chain(5, 3), make_delayed_chain(6, 2), two_state(),
                                make_random_layered(5, 3, 4, 11)}) {
    const std::string bytes = encode_binary(mdp);
    const TabularMdp back = decode_binary(bytes);
    EXPECT_EQ(back, mdp);
    EXPECT_EQ(encode_binary(back), bytes);
  }
}

TEST(Io, FileRoundTripBinaryAndJson) {
  const TabularMdp mdp = make_distractor(5, 3);
  const auto bin = temp_file("rt.mdp");
  const auto json = temp_file("rt.json");
  save_mdp(mdp, bin.string());
  save_mdp_json(mdp, json.string());
  EXPECT_EQ(load_mdp(bin.string()), mdp);
  EXPECT_EQ(load_mdp(json.string()), mdp);
  std::filesystem::remove(bin);
  std::filesystem::remove(json);
}

TEST(Io, ErrorsAreDistinct) {
  const std::string bytes = encode_binary(make_dense_chain(3, 2));
  EXPECT_THROW(decode_binary(bytes.substr(0, bytes.size() - 3)), SizeError);
  EXPECT_THROW(decode_binary(bytes.substr(0, 12)), SizeError);
  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  EXPECT_THROW(decode_binary(wrong_magic), FormatError);
  EXPECT_THROW(load_mdp("/nonexistent/dir/file.mdp"), IoError);
}

TEST(Io, SaveRejectsInvalidMdp) {
  const TabularMdp bad(2, 2, 3, 0, {2, 0, 1, 1}, {1.0, 0.0, 0.0, 0.0}, {0, 1});
  EXPECT_THROW(encode_binary(bad), PreconditionError);
}

TEST(Io, PolicyJsonRoundTrip) {
  const Policy p = Policy::stochastic(2, 1, 2, {0.25, 0.75, 1.0, 0.0});
  const Policy back = policy_from_json(policy_to_json(p));
  EXPECT_DOUBLE_EQ(back.prob(0, 0, 1), 0.75);
  EXPECT_DOUBLE_EQ(back.prob(1, 0, 1), 0.0);
  const Policy d = Policy::deterministic(1, 2, 3, {2, 1});
  EXPECT_DOUBLE_EQ(policy_from_json(policy_to_json(d)).prob(0, 1, 1), 1.0);
}

TEST(Policy, RejectsBadRows) {
  EXPECT_THROW(Policy::stochastic(1, 1, 2, {0.5, 0.6}), PreconditionError);
  EXPECT_THROW(Policy::stochastic(1, 1, 2, {1.5, -0.5}), PreconditionError);
  EXPECT_THROW(Policy::deterministic(1, 1, 2, {2}), PreconditionError);
  EXPECT_NO_THROW(Policy::stochastic(1, 1, 2, {0.5, 0.5 + 1e-10}));
}
