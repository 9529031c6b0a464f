#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "slowdos/attack_synth.hpp"
#include "slowdos/packet.hpp"

namespace slowdos::testing {

inline constexpr Endpoint kTarget = kDefaultTarget;
inline constexpr std::uint8_t kData = tcp::kPsh | tcp::kAck;

inline PacketRecord to_server(Ipv4 client, std::uint16_t port, double t,
                              std::uint8_t flags = kData, std::uint32_t len = 10) {
  return {from_seconds(t), client, kTarget.ip, port, kTarget.port, flags, len};
}

inline PacketRecord to_client(Ipv4 client, std::uint16_t port, double t,
                              std::uint8_t flags = tcp::kAck, std::uint32_t len = 0) {
  return {from_seconds(t), kTarget.ip, client, kTarget.port, port, flags, len};
}

/// Data packets from one client connection at the given times, no handshake.
inline std::vector<PacketRecord> data_at(Ipv4 client, std::uint16_t port,
                                         std::initializer_list<double> times) {
  std::vector<PacketRecord> out;
  for (double t : times) out.push_back(to_server(client, port, t));
  return out;
}

inline LabeledTrace make_trace(std::vector<PacketRecord> packets, std::set<Ipv4> attackers) {
  LabeledTrace trace;
  sort_packets(packets);
  trace.packets = std::move(packets);
  trace.attacker_ips = std::move(attackers);
  trace.target = kTarget;
  return trace;
}

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("slowdos_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace slowdos::testing
