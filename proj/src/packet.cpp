#include "slowdos/packet.hpp"

#include <algorithm>
#include <cmath>

namespace slowdos {

Micros from_seconds(double s) { return static_cast<Micros>(std::llround(s * 1e6)); }

std::set<Ipv4> LabeledTrace::client_ips() const {
  std::set<Ipv4> out;
  for (const auto& p : packets) out.insert(client_of(p));
  return out;
}

std::set<Ipv4> LabeledTrace::benign_ips() const {
  std::set<Ipv4> out;
  for (const auto& p : packets) {
    const Ipv4 c = client_of(p);
    if (!attacker_ips.contains(c)) out.insert(c);
  }
  return out;
}

void sort_packets(std::vector<PacketRecord>& packets) {
  std::stable_sort(packets.begin(), packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.ts < b.ts; });
}

}  // namespace slowdos
