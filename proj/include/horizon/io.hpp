#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "horizon/errors.hpp"
#include "horizon/mdp.hpp"
#include "horizon/policy.hpp"

namespace horizon {

inline constexpr std::array<char, 8> kMdpMagic{'B', 'R', 'D', 'G', 'M', 'D', 'P', '1'};
inline constexpr std::size_t kJsonMirrorLimit = 100000;

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

inline std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

inline void put_f64(std::string& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

inline double get_f64(const std::string& in, std::size_t pos) {
  const std::uint64_t bits = get_u64(in, pos);
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on '" + path + "'");
  return data;
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write error on '" + path + "'");
}

}  // namespace detail

inline std::string encode_binary(const TabularMdp& mdp) {
  if (!validate(mdp).empty()) throw PreconditionError("refusing to save an invalid MDP");
  std::string out(kMdpMagic.begin(), kMdpMagic.end());
  detail::put_u64(out, mdp.num_states());
  detail::put_u64(out, mdp.num_actions());
  detail::put_u64(out, mdp.horizon());
  detail::put_u64(out, mdp.start_state());
  detail::put_f64(out, mdp.discount());
  for (std::uint8_t flag : mdp.terminal_flags()) out.push_back(static_cast<char>(flag ? 1 : 0));
  for (StateIndex nxt : mdp.transitions()) detail::put_u64(out, static_cast<std::uint64_t>(nxt));
  for (double r : mdp.rewards()) detail::put_f64(out, r);
  return out;
}

inline TabularMdp decode_binary(const std::string& data) {
  constexpr std::size_t header = 8 + 4 * 8 + 8;
  if (data.size() < kMdpMagic.size() ||
      std::memcmp(data.data(), kMdpMagic.data(), kMdpMagic.size()) != 0) {
    throw FormatError("not an MDP file: magic number mismatch");
  }
  if (data.size() < header) throw SizeError("MDP file truncated inside the header");
  const std::uint64_t s = detail::get_u64(data, 8);
  const std::uint64_t a = detail::get_u64(data, 16);
  const std::uint64_t t = detail::get_u64(data, 24);
  const std::uint64_t start = detail::get_u64(data, 32);
  const double discount = detail::get_f64(data, 40);
  constexpr std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / 32;
  if (s == 0 || a == 0 || s > limit || a > limit / s) {
    throw SizeError("MDP header declares an impossible table size");
  }
  const std::uint64_t cells = s * a;
  const std::uint64_t expected = header + s + 16 * cells;
  if (data.size() != expected) {
    throw SizeError("MDP file has " + std::to_string(data.size()) + " bytes, header implies " +
                    std::to_string(expected));
  }
  std::vector<std::uint8_t> terminal(s);
  for (std::uint64_t i = 0; i < s; ++i) terminal[i] = data[header + i] != 0 ? 1 : 0;
  std::vector<StateIndex> transitions(cells);
  std::vector<double> rewards(cells);
  const std::size_t trans_at = header + s;
  const std::size_t reward_at = trans_at + 8 * cells;
  for (std::uint64_t i = 0; i < cells; ++i) {
    const auto raw = static_cast<std::int64_t>(detail::get_u64(data, trans_at + 8 * i));
    if (raw < 0) throw FormatError("negative transition entry in MDP file");
    transitions[i] = static_cast<StateIndex>(raw);
    rewards[i] = detail::get_f64(data, reward_at + 8 * i);
  }
  return TabularMdp(s, a, t, start, std::move(transitions), std::move(rewards),
                    std::move(terminal), discount);
}

inline nlohmann::json mdp_to_json(const TabularMdp& mdp) {
  if (mdp.num_states() * mdp.num_actions() > kJsonMirrorLimit) {
    throw PreconditionError("JSON mirror is limited to S*A <= 100000");
  }
  nlohmann::json j;
  j["S"] = mdp.num_states();
  j["A"] = mdp.num_actions();
  j["T"] = mdp.horizon();
  j["start_state"] = mdp.start_state();
  j["discount"] = mdp.discount();
  nlohmann::json flags = nlohmann::json::array();
  nlohmann::json trans = nlohmann::json::array();
  nlohmann::json rew = nlohmann::json::array();
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    flags.push_back(mdp.is_terminal(s));
    nlohmann::json trow = nlohmann::json::array();
    nlohmann::json rrow = nlohmann::json::array();
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      trow.push_back(mdp.next(s, a));
      rrow.push_back(mdp.reward(s, a));
    }
    trans.push_back(std::move(trow));
    rew.push_back(std::move(rrow));
  }
  j["terminal_flags"] = std::move(flags);
  j["transitions"] = std::move(trans);
  j["rewards"] = std::move(rew);
  return j;
}

inline TabularMdp mdp_from_json(const nlohmann::json& j) {
  try {
    const std::size_t s = j.at("S").get<std::size_t>();
    const std::size_t a = j.at("A").get<std::size_t>();
    if (s == 0 || a == 0 || s * a > kJsonMirrorLimit) {
      throw SizeError("JSON MDP must have 1 <= S*A <= 100000");
    }
    const auto& flags = j.at("terminal_flags");
    const auto& trans = j.at("transitions");
    const auto& rew = j.at("rewards");
    if (flags.size() != s || trans.size() != s || rew.size() != s) {
      throw SizeError("JSON MDP tables do not have S rows");
    }
    std::vector<std::uint8_t> terminal(s);
    std::vector<StateIndex> transitions(s * a);
    std::vector<double> rewards(s * a);
    for (std::size_t i = 0; i < s; ++i) {
      terminal[i] = flags[i].get<bool>() ? 1 : 0;
      if (trans[i].size() != a || rew[i].size() != a) {
        throw SizeError("JSON MDP row " + std::to_string(i) + " does not have A entries");
      }
      for (std::size_t k = 0; k < a; ++k) {
        const auto raw = trans[i][k].get<std::int64_t>();
        if (raw < 0) throw FormatError("negative transition entry in JSON MDP");
        transitions[i * a + k] = static_cast<StateIndex>(raw);
        rewards[i * a + k] = rew[i][k].get<double>();
      }
    }
    return TabularMdp(s, a, j.at("T").get<std::size_t>(), j.at("start_state").get<std::size_t>(),
                      std::move(transitions), std::move(rewards), std::move(terminal),
                      j.value("discount", 1.0));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed JSON MDP: ") + e.what());
  }
}

inline void save_mdp(const TabularMdp& mdp, const std::string& path) {
  detail::write_file(path, encode_binary(mdp));
}

inline void save_mdp_json(const TabularMdp& mdp, const std::string& path) {
  if (!validate(mdp).empty()) throw PreconditionError("refusing to save an invalid MDP");
  detail::write_file(path, mdp_to_json(mdp).dump() + "\n");
}

/// Loads either the binary format or its JSON mirror, chosen by content.
inline TabularMdp load_mdp(const std::string& path) {
  const std::string data = detail::read_file(path);
  const auto first = data.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && data[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(data);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("unparseable JSON MDP '" + path + "': " + e.what());
    }
    return mdp_from_json(j);
  }
  return decode_binary(data);
}

inline Policy policy_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const std::size_t a = j.at("A").get<std::size_t>();
    if (kind == "uniform") return Policy::uniform(a);
    const std::size_t t = j.at("T").get<std::size_t>();
    const std::size_t s = j.at("S").get<std::size_t>();
    if (kind == "stochastic") {
      return Policy::stochastic(t, s, a, j.at("probs").get<std::vector<double>>());
    }
    if (kind == "deterministic") {
      return Policy::deterministic(t, s, a, j.at("actions").get<std::vector<ActionIndex>>());
    }
    throw FormatError("unknown policy kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed policy JSON: ") + e.what());
  }
}

inline nlohmann::json policy_to_json(const Policy& policy) {
  nlohmann::json j;
  j["A"] = policy.num_actions();
  switch (policy.kind()) {
    case Policy::Kind::uniform:
      j["kind"] = "uniform";
      break;
    case Policy::Kind::stochastic:
      j["kind"] = "stochastic";
      j["T"] = policy.horizon();
      j["S"] = policy.num_states();
      j["probs"] = policy.probabilities();
      break;
    case Policy::Kind::deterministic:
      j["kind"] = "deterministic";
      j["T"] = policy.horizon();
      j["S"] = policy.num_states();
      j["actions"] = policy.actions();
      break;
  }
  return j;
}

inline Policy load_policy(const std::string& path) {
  const std::string data = detail::read_file(path);
  try {
    return policy_from_json(nlohmann::json::parse(data));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("unparseable policy file '" + path + "': " + e.what());
  }
}

}  // namespace horizon
