#include "slowdos/attack_synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slowdos/errors.hpp"
#include "slowdos/random.hpp"

namespace slowdos {

namespace {

constexpr Micros kRtt = 1'000;            // attacker round trip
constexpr Micros kSocketStagger = 1'000;  // tools open sockets one by one
constexpr Micros kAckDelay = 20;
constexpr Micros kCharSpacing = 1'000;    // slowloris-ng intra-burst spacing
constexpr std::uint8_t kPshAck = tcp::kPsh | tcp::kAck;

std::uint64_t block_capacity(const Cidr& block) {
  return block.prefix_len <= 30 ? block.size() - 2 : block.size();
}

Ipv4 nth_host(const Cidr& block, std::uint64_t n) {
  const std::uint64_t offset = block.prefix_len <= 30 ? n + 1 : n;
  return Ipv4(static_cast<std::uint32_t>(block.network.value + offset));
}

class Emitter {
 public:
  Emitter(std::vector<PacketRecord>& out, Endpoint target) : out_(out), target_(target) {}

  void client(Micros ts, Ipv4 ip, std::uint16_t port, std::uint8_t flags, std::uint32_t len = 0) {
    out_.push_back({ts, ip, target_.ip, port, target_.port, flags, len});
  }
  void server(Micros ts, Ipv4 ip, std::uint16_t port, std::uint8_t flags, std::uint32_t len = 0) {
    out_.push_back({ts, target_.ip, ip, target_.port, port, flags, len});
  }

  /// SYN / SYN-ACK / ACK starting at t0; returns the time of the client ACK.
  Micros handshake(Micros t0, Micros rtt, Ipv4 ip, std::uint16_t port) {
    client(t0, ip, port, tcp::kSyn);
    server(t0 + rtt, ip, port, tcp::kSyn | tcp::kAck);
    client(t0 + rtt + kAckDelay, ip, port, tcp::kAck);
    return t0 + rtt + kAckDelay;
  }

 private:
  std::vector<PacketRecord>& out_;
  Endpoint target_;
};

struct Socket {
  Ipv4 ip;
  std::uint16_t port;
  Micros start;
  std::uint64_t index;
};

std::vector<Socket> attack_sockets(const AttackProfile& p) {
  std::vector<Socket> sockets;
  const Micros start = from_seconds(p.start_ts);
  for (int c = 0; c < p.clients; ++c) {
    for (int s = 0; s < p.sockets_per_client; ++s) {
      const auto k = static_cast<std::uint64_t>(c) * p.sockets_per_client + s;
      sockets.push_back({nth_host(p.attacker_block, c),
                         static_cast<std::uint16_t>(32768 + k % 28232),
                         start + static_cast<Micros>(k) * kSocketStagger, k});
    }
  }
  return sockets;
}

LabeledTrace finish(std::vector<PacketRecord> packets, const AttackProfile& p) {
  LabeledTrace trace;
  sort_packets(packets);
  trace.packets = std::move(packets);
  trace.target = p.target;
  trace.tool = std::string(tool_name(p.tool));
  for (int c = 0; c < p.clients; ++c) trace.attacker_ips.insert(nth_host(p.attacker_block, c));
  return trace;
}

void require_tool(const AttackProfile& p, AttackTool tool) {
  p.validate();
  if (p.tool != tool) {
    throw ConfigError("profile is for " + std::string(tool_name(p.tool)) + ", not " +
                      std::string(tool_name(tool)));
  }
}

// Number of whole intervals that fit in the duration.
std::int64_t sends_within(double duration, Micros interval) {
  return from_seconds(duration) / interval;
}

}  // namespace

std::string_view tool_name(AttackTool tool) {
  switch (tool) {
    case AttackTool::Slowloris: return "slowloris";
    case AttackTool::Slowhttptest: return "slowhttptest";
    case AttackTool::SlowlorisNg: return "slowloris-ng";
  }
  return "?";
}

AttackTool parse_tool(std::string_view name) {
  if (name == "slowloris") return AttackTool::Slowloris;
  if (name == "slowhttptest") return AttackTool::Slowhttptest;
  if (name == "slowloris-ng" || name == "slowloris_ng") return AttackTool::SlowlorisNg;
  throw ConfigError("unknown attack tool '" + std::string(name) +
                    "' (expected slowloris, slowhttptest or slowloris-ng)");
}

void AttackProfile::validate() const {
  if (clients < 1) throw ConfigError("clients must be >= 1");
  if (sockets_per_client < 1) throw ConfigError("sockets_per_client must be >= 1");
  if (!(jitter >= 0.0) || !(interval > jitter)) throw ConfigError("need interval > jitter >= 0");
  if (from_seconds(interval - jitter) < 1) throw ConfigError("interval too small");
  if (!(duration >= 0.0) || !(start_ts >= 0.0)) throw ConfigError("start_ts and duration must be >= 0");
  if (content_length < 1 || body_chunk < 1) throw ConfigError("content_length and body_chunk must be >= 1");
  if (static_cast<std::uint64_t>(clients) > block_capacity(attacker_block)) {
    throw ConfigError(std::to_string(clients) + " clients exceed the capacity of " +
                      attacker_block.str());
  }
  if (static_cast<std::uint64_t>(sockets_per_client) > 28232) {
    throw ConfigError("too many sockets per client");
  }
}

AttackProfile default_profile(AttackTool tool) {
  AttackProfile p;
  p.tool = tool;
  switch (tool) {
    case AttackTool::Slowloris: p.interval = 15.0; break;
    case AttackTool::Slowhttptest: p.interval = 30.0; break;
    case AttackTool::SlowlorisNg:
      p.interval = 15.0;
      p.jitter = 5.0;
      break;
  }
  return p;
}

LabeledTrace synth_slowloris(const AttackProfile& p) {
  require_tool(p, AttackTool::Slowloris);
  std::vector<PacketRecord> packets;
  Emitter emit(packets, p.target);
  const Micros interval = from_seconds(p.interval);
  const std::int64_t headers = sends_within(p.duration, interval);
  for (const Socket& s : attack_sockets(p)) {
    Rng rng(p.rng_seed, s.index);
    const Micros request = emit.handshake(s.start, kRtt, s.ip, s.port) + kAckDelay;
    // "GET /?NNN HTTP/1.1\r\n" with a random query.
    emit.client(request, s.ip, s.port, kPshAck, static_cast<std::uint32_t>(17 + rng.uniform_int(1, 4)));
    emit.server(request + kRtt, s.ip, s.port, tcp::kAck);
    for (std::int64_t k = 1; k <= headers; ++k) {
      const Micros t = request + k * interval;
      // "X-a: NNNN\r\n"
      emit.client(t, s.ip, s.port, kPshAck, static_cast<std::uint32_t>(7 + rng.uniform_int(1, 4)));
      emit.server(t + kRtt, s.ip, s.port, tcp::kAck);
    }
  }
  return finish(std::move(packets), p);
}

LabeledTrace synth_slowhttptest(const AttackProfile& p) {
  require_tool(p, AttackTool::Slowhttptest);
  std::vector<PacketRecord> packets;
  Emitter emit(packets, p.target);
  const Micros interval = from_seconds(p.interval);
  const std::int64_t needed = (p.content_length + p.body_chunk - 1) / p.body_chunk;
  const std::int64_t bodies = std::min(needed, sends_within(p.duration, interval));
  for (const Socket& s : attack_sockets(p)) {
    const Micros request = emit.handshake(s.start, kRtt, s.ip, s.port) + kAckDelay;
    emit.client(request, s.ip, s.port, kPshAck, 240);  // POST header with Content-Length
    emit.server(request + kRtt, s.ip, s.port, tcp::kAck);
    Micros last = request;
    std::int64_t remaining = p.content_length;
    for (std::int64_t k = 1; k <= bodies; ++k) {
      last = request + k * interval;
      const auto chunk = static_cast<std::uint32_t>(std::min<std::int64_t>(p.body_chunk, remaining));
      remaining -= chunk;
      emit.client(last, s.ip, s.port, kPshAck, chunk);
      emit.server(last + kRtt, s.ip, s.port, tcp::kAck);
    }
    if (bodies == needed) {
      // Body complete: the server answers and both sides close.
      emit.server(last + 2 * kRtt, s.ip, s.port, kPshAck, 512);
      emit.server(last + 2 * kRtt + kAckDelay, s.ip, s.port, tcp::kFin | tcp::kAck);
      emit.client(last + 3 * kRtt, s.ip, s.port, tcp::kFin | tcp::kAck);
    }
  }
  return finish(std::move(packets), p);
}

LabeledTrace synth_slowloris_ng(const AttackProfile& p) {
  require_tool(p, AttackTool::SlowlorisNg);
  std::vector<PacketRecord> packets;
  Emitter emit(packets, p.target);
  const Micros horizon = from_seconds(p.duration);
  for (const Socket& s : attack_sockets(p)) {
    Rng rng(p.rng_seed, s.index);
    const Micros request = emit.handshake(s.start, kRtt, s.ip, s.port) + kAckDelay;
    emit.client(request, s.ip, s.port, kPshAck, static_cast<std::uint32_t>(17 + rng.uniform_int(1, 4)));
    emit.server(request + kRtt, s.ip, s.port, tcp::kAck);
    Micros burst = request;
    while (true) {
      burst += from_seconds(p.interval + rng.uniform(-p.jitter, p.jitter));
      if (burst - request > horizon) break;
      // "X-abcd: 1234\r\n"-style line of 12 to 16 characters.
      const auto len = static_cast<std::uint32_t>(rng.uniform_int(12, 16));
      Micros t = burst;
      if (p.burst_per_char) {
        for (std::uint32_t c = 0; c < len; ++c, t += kCharSpacing) emit.client(t, s.ip, s.port, kPshAck, 1);
        t -= kCharSpacing;
      } else {
        emit.client(t, s.ip, s.port, kPshAck, len);
      }
      emit.server(t + kRtt, s.ip, s.port, tcp::kAck);
    }
  }
  return finish(std::move(packets), p);
}

LabeledTrace synth_attack(const AttackProfile& profile) {
  switch (profile.tool) {
    case AttackTool::Slowloris: return synth_slowloris(profile);
    case AttackTool::Slowhttptest: return synth_slowhttptest(profile);
    case AttackTool::SlowlorisNg: return synth_slowloris_ng(profile);
  }
  throw ConfigError("unknown tool");
}

void BenignProfile::validate() const {
  if (clients < 1) throw ConfigError("benign clients must be >= 1");
  if (static_cast<std::uint64_t>(clients) > block_capacity(block)) {
    throw ConfigError("benign clients exceed the capacity of " + block.str());
  }
  if (!(duration > 0.0) || !(start_ts >= 0.0)) throw ConfigError("benign duration must be > 0");
  if (!(mean_session_gap > 0.0) || !(slow_mean_gap > 0.0) || !(timer_period > 0.0)) {
    throw ConfigError("benign timing parameters must be positive");
  }
  if (slow_fraction < 0.0 || timer_fraction < 0.0 || slow_fraction + timer_fraction > 1.0) {
    throw ConfigError("benign client fractions must be within [0, 1]");
  }
}

namespace {

class BenignClient {
 public:
  BenignClient(const BenignProfile& p, Emitter& emit, Ipv4 ip, Rng& rng)
      : p_(p), emit_(emit), ip_(ip), rng_(rng),
        rtt_(from_seconds(rng.uniform(0.005, 0.1))) {}

  /// One web session: handshake, 1-4 requests with responses, close.
  /// Timer-driven clients upload in exactly periodic packets instead of
  /// browsing. Returns the close time.
  Micros session(Micros t0, bool timer) {
    const auto port = next_port();
    Micros t = emit_.handshake(t0, rtt_, ip_, port);
    if (timer) {
      const Micros period = from_seconds(p_.timer_period);
      const auto n = rng_.uniform_int(5, 30);
      t += from_seconds(rng_.uniform(0.0001, 0.002));
      for (std::int64_t k = 0; k < n; ++k, t += period) {
        emit_.client(t, ip_, port, kPshAck, 1400);
        emit_.server(t + rtt_, ip_, port, tcp::kAck);
      }
    } else {
      const auto requests = rng_.uniform_int(1, 4);
      for (std::int64_t r = 0; r < requests; ++r) {
        if (r > 0) t += from_seconds(rng_.exponential(2.0));
        t += from_seconds(rng_.uniform(0.00005, 0.002));
        emit_.client(t, ip_, port, kPshAck, static_cast<std::uint32_t>(rng_.uniform_int(200, 700)));
        const auto segments = rng_.uniform_int(1, 12);
        Micros s = t + rtt_ + from_seconds(rng_.uniform(0.001, 0.05));
        for (std::int64_t k = 0; k < segments; ++k) {
          emit_.server(s, ip_, port, kPshAck, k + 1 == segments ? 600 : 1448);
          if (k % 2 == 1 || k + 1 == segments) {
            emit_.client(s + from_seconds(rng_.uniform(0.0001, 0.005)), ip_, port, tcp::kAck);
          }
          s += from_seconds(rng_.uniform(0.00005, 0.003));
        }
        t = s + from_seconds(0.005);
      }
    }
    const Micros close = t + from_seconds(rng_.uniform(0.01, 5.0));
    emit_.client(close, ip_, port, tcp::kFin | tcp::kAck);
    emit_.server(close + rtt_, ip_, port, tcp::kFin | tcp::kAck);
    return close + rtt_;
  }

  /// A long-lived connection trickling small messages at irregular gaps.
  void long_poll(Micros t0, Micros end) {
    const auto port = next_port();
    Micros t = emit_.handshake(t0, rtt_, ip_, port);
    while (true) {
      t += std::max<Micros>(1, from_seconds(rng_.exponential(p_.slow_mean_gap)));
      if (t >= end) break;
      emit_.client(t, ip_, port, kPshAck, static_cast<std::uint32_t>(rng_.uniform_int(1, 100)));
      emit_.server(t + rtt_, ip_, port, tcp::kAck);
    }
  }

 private:
  std::uint16_t next_port() { return static_cast<std::uint16_t>(49152 + (sessions_++ % 16384)); }

  const BenignProfile& p_;
  Emitter& emit_;
  Ipv4 ip_;
  Rng& rng_;
  Micros rtt_;
  std::uint64_t sessions_ = 0;
};

}  // namespace

LabeledTrace synth_benign(const BenignProfile& p) {
  p.validate();
  std::vector<PacketRecord> packets;
  Emitter emit(packets, p.target);
  const Micros start = from_seconds(p.start_ts);
  const Micros end = start + from_seconds(p.duration);
  for (int c = 0; c < p.clients; ++c) {
    Rng rng(p.rng_seed, static_cast<std::uint64_t>(c));
    BenignClient client(p, emit, nth_host(p.block, c), rng);
    const double kind = rng.uniform01();
    if (kind < p.slow_fraction) {
      client.long_poll(start + from_seconds(rng.uniform(0.0, std::min(30.0, p.duration))), end);
      continue;
    }
    const bool timer = kind < p.slow_fraction + p.timer_fraction;
    Micros t = start + from_seconds(rng.exponential(p.mean_session_gap));
    if (t >= end) t = start + from_seconds(rng.uniform(0.0, p.duration));
    while (t < end) {
      const Micros closed = client.session(t, timer);
      t = closed + from_seconds(rng.exponential(p.mean_session_gap));
    }
  }
  LabeledTrace trace;
  sort_packets(packets);
  trace.packets = std::move(packets);
  trace.target = p.target;
  return trace;
}

LabeledTrace merge_traces(const LabeledTrace& benign, const LabeledTrace& attack, double offset_s) {
  if (benign.target != attack.target) throw DataError("cannot merge traces with different targets");
  const auto benign_clients = benign.client_ips();
  for (const Ipv4 ip : attack.client_ips()) {
    if (benign_clients.contains(ip)) throw DataError("client IP collision: " + ip.str());
  }
  const Micros offset = from_seconds(offset_s);
  std::vector<PacketRecord> shifted = attack.packets;
  for (auto& p : shifted) {
    p.ts += offset;
    if (p.ts < 0) throw DataError("offset moves attack packets before the trace epoch");
  }
  LabeledTrace out;
  out.target = benign.target;
  out.attacker_ips = attack.attacker_ips;
  out.tool = attack.tool;
  out.packets.reserve(benign.packets.size() + shifted.size());
  std::merge(benign.packets.begin(), benign.packets.end(), shifted.begin(), shifted.end(),
             std::back_inserter(out.packets),
             [](const PacketRecord& a, const PacketRecord& b) { return a.ts < b.ts; });
  return out;
}

}  // namespace slowdos
