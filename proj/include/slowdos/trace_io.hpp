#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "slowdos/packet.hpp"

namespace slowdos {

struct PcapReadResult {
  LabeledTrace trace;
  /// Packets dropped because they were not TCP or not to/from the target.
  std::size_t dropped = 0;
  std::vector<std::string> warnings;
};

/// Reads a classic pcap (Ethernet link type, either byte order, micro- or
/// nanosecond magic) and keeps the TCP packets to or from `target`, sorted
/// by timestamp. Labels are left empty.
PcapReadResult read_pcap(const std::filesystem::path& path, Endpoint target);

/// Same as read_pcap but from an in-memory capture.
PcapReadResult parse_pcap(const std::vector<std::byte>& bytes, Endpoint target);

/// Marks every client IP inside `attacker_block` as attacker.
LabeledTrace label_from_blocks(LabeledTrace trace, const Cidr& attacker_block);

struct WriteOptions {
  /// Capture only the 54 bytes of Ethernet/IPv4/TCP headers per packet. The
  /// payload length stays recoverable from the IPv4 total-length field.
  bool headers_only = true;
};

/// Serialises packets as a classic little-endian pcap.
std::vector<std::byte> encode_pcap(const LabeledTrace& trace,
                                   const WriteOptions& options = {});

/// Writes the pcap and its `<stem>.labels.json` sidecar.
void write_trace(const LabeledTrace& trace, const std::filesystem::path& path,
                 const WriteOptions& options = {});

/// `a/b/trace.pcap` -> `a/b/trace.labels.json`.
std::filesystem::path sidecar_path(const std::filesystem::path& pcap_path);

struct LabelSidecar {
  std::set<Ipv4> attacker_ips;
  Endpoint target;
  std::optional<std::string> tool;
};

LabelSidecar read_labels(const std::filesystem::path& sidecar);
void write_labels(const LabelSidecar& labels, const std::filesystem::path& sidecar);

/// read_pcap with target and labels taken from the sidecar.
PcapReadResult load_labeled_trace(const std::filesystem::path& pcap_path);

}  // namespace slowdos
