#include "slowdos/trace_io.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "slowdos/errors.hpp"

namespace slowdos {

namespace {

constexpr std::uint32_t kMagicMicros = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNanos = 0xa1b23c4d;
constexpr std::uint32_t kLinkEthernet = 1;
constexpr std::size_t kGlobalHeaderLen = 24;
constexpr std::size_t kRecordHeaderLen = 16;
constexpr std::size_t kEthLen = 14;
constexpr std::size_t kHeadersLen = kEthLen + 20 + 20;
constexpr std::uint16_t kEtherIpv4 = 0x0800;
constexpr std::uint16_t kEtherIpv6 = 0x86dd;
constexpr std::uint8_t kProtoTcp = 6;

class Reader {
 public:
  Reader(const std::vector<std::byte>& bytes, bool swap) : bytes_(bytes), swap_(swap) {}

  std::uint32_t u32(std::size_t off) const {
    std::uint32_t v = 0;
    std::memcpy(&v, bytes_.data() + off, 4);
    return swap_ ? __builtin_bswap32(v) : v;
  }

 private:
  const std::vector<std::byte>& bytes_;
  bool swap_;
};

std::uint8_t byte_at(const std::vector<std::byte>& b, std::size_t off) {
  return std::to_integer<std::uint8_t>(b[off]);
}

std::uint16_t be16(const std::vector<std::byte>& b, std::size_t off) {
  return static_cast<std::uint16_t>((byte_at(b, off) << 8) | byte_at(b, off + 1));
}

std::uint32_t be32(const std::vector<std::byte>& b, std::size_t off) {
  return (std::uint32_t{be16(b, off)} << 16) | be16(b, off + 2);
}

class Writer {
 public:
  explicit Writer(std::vector<std::byte>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(std::byte{v}); }
  void le16(std::uint16_t v) { u8(v & 0xff); u8(v >> 8); }
  void le32(std::uint32_t v) { le16(v & 0xffff); le16(v >> 16); }
  void be16(std::uint16_t v) { u8(v >> 8); u8(v & 0xff); }
  void be32(std::uint32_t v) { be16(v >> 16); be16(v & 0xffff); }
  void zeros(std::size_t n) { out_.insert(out_.end(), n, std::byte{0}); }

 private:
  std::vector<std::byte>& out_;
};

std::uint16_t ipv4_checksum(const std::array<std::uint8_t, 20>& hdr) {
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i < hdr.size(); i += 2) sum += (hdr[i] << 8) | hdr[i + 1];
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

}  // namespace

PcapReadResult parse_pcap(const std::vector<std::byte>& bytes, Endpoint target) {
  if (bytes.size() < kGlobalHeaderLen) throw FormatError("pcap: truncated global header");

  std::uint32_t magic = 0;
  std::memcpy(&magic, bytes.data(), 4);
  bool swap = false;
  if (magic != kMagicMicros && magic != kMagicNanos) {
    magic = __builtin_bswap32(magic);
    swap = true;
    if (magic != kMagicMicros && magic != kMagicNanos) {
      throw FormatError("pcap: bad magic number (pcapng is not supported)");
    }
  }
  const bool nanos = magic == kMagicNanos;
  const Reader rd(bytes, swap);
  if (const auto link = rd.u32(20); link != kLinkEthernet) {
    throw FormatError("pcap: unsupported link type " + std::to_string(link));
  }

  PcapReadResult result;
  result.trace.target = target;
  auto& packets = result.trace.packets;

  std::size_t off = kGlobalHeaderLen;
  while (off < bytes.size()) {
    if (bytes.size() - off < kRecordHeaderLen) throw FormatError("pcap: truncated record header");
    const std::uint32_t sec = rd.u32(off);
    const std::uint32_t frac = rd.u32(off + 4);
    const std::uint32_t incl = rd.u32(off + 8);
    off += kRecordHeaderLen;
    if (bytes.size() - off < incl) throw FormatError("pcap: truncated packet data");
    const std::size_t pkt = off;
    off += incl;

    if (incl < kEthLen) {
      ++result.dropped;
      continue;
    }
    const std::uint16_t ether = be16(bytes, pkt + 12);
    if (ether == kEtherIpv6) throw FormatError("pcap: IPv6 traffic is not supported");
    if (ether != kEtherIpv4) {
      ++result.dropped;
      continue;
    }
    const std::size_t ip = pkt + kEthLen;
    const std::size_t ip_avail = incl - kEthLen;
    if (ip_avail < 20 || (byte_at(bytes, ip) >> 4) != 4) {
      ++result.dropped;
      continue;
    }
    const std::size_t ihl = (byte_at(bytes, ip) & 0x0f) * 4u;
    const std::uint16_t total_len = be16(bytes, ip + 2);
    const std::uint16_t frag = be16(bytes, ip + 6) & 0x3fff;
    if (byte_at(bytes, ip + 9) != kProtoTcp || ihl < 20 || frag != 0 || ip_avail < ihl + 14) {
      ++result.dropped;
      continue;
    }
    const std::size_t tcp = ip + ihl;
    PacketRecord rec;
    rec.ts = static_cast<Micros>(sec) * 1'000'000 + (nanos ? frac / 1000 : frac);
    rec.src_ip = Ipv4(be32(bytes, ip + 12));
    rec.dst_ip = Ipv4(be32(bytes, ip + 16));
    rec.src_port = be16(bytes, tcp);
    rec.dst_port = be16(bytes, tcp + 2);
    rec.flags = byte_at(bytes, tcp + 13) & 0x1f;
    const std::size_t doff = (byte_at(bytes, tcp + 12) >> 4) * 4u;
    rec.payload_len = total_len > ihl + doff ? static_cast<std::uint32_t>(total_len - ihl - doff) : 0;

    const Endpoint src{rec.src_ip, rec.src_port};
    const Endpoint dst{rec.dst_ip, rec.dst_port};
    if (src != target && dst != target) {
      ++result.dropped;
      continue;
    }
    packets.push_back(rec);
  }
  sort_packets(packets);
  if (packets.empty()) {
    result.warnings.push_back("no TCP packets to or from " + target.ip.str() + ":" +
                              std::to_string(target.port));
  }
  return result;
}

PcapReadResult read_pcap(const std::filesystem::path& path, Endpoint target) {
  return parse_pcap(read_file(path), target);
}

LabeledTrace label_from_blocks(LabeledTrace trace, const Cidr& attacker_block) {
  trace.attacker_ips.clear();
  for (const Ipv4 c : trace.client_ips()) {
    if (attacker_block.contains(c)) trace.attacker_ips.insert(c);
  }
  return trace;
}

std::vector<std::byte> encode_pcap(const LabeledTrace& trace, const WriteOptions& options) {
  std::vector<std::byte> out;
  Writer w(out);
  w.le32(kMagicMicros);
  w.le16(2);
  w.le16(4);
  w.le32(0);
  w.le32(0);
  w.le32(65535);
  w.le32(kLinkEthernet);

  Micros prev = 0;
  for (const auto& p : trace.packets) {
    if (p.ts < 0) throw DataError("cannot write negative timestamps");
    if (p.ts < prev) throw DataError("packets must be sorted before writing");
    prev = p.ts;
    if (p.payload_len > 65535 - 40) throw DataError("payload length exceeds IPv4 maximum");

    const std::uint32_t captured_payload = options.headers_only ? 0 : p.payload_len;
    w.le32(static_cast<std::uint32_t>(p.ts / 1'000'000));
    w.le32(static_cast<std::uint32_t>(p.ts % 1'000'000));
    w.le32(static_cast<std::uint32_t>(kHeadersLen + captured_payload));
    w.le32(static_cast<std::uint32_t>(kHeadersLen + p.payload_len));

    // Ethernet, locally administered MACs.
    const bool inbound = trace.to_target(p);
    constexpr std::array<std::uint8_t, 6> server_mac{0x02, 0, 0, 0, 0, 0x01};
    constexpr std::array<std::uint8_t, 6> client_mac{0x02, 0, 0, 0, 0, 0x02};
    for (auto b : inbound ? server_mac : client_mac) w.u8(b);
    for (auto b : inbound ? client_mac : server_mac) w.u8(b);
    w.be16(kEtherIpv4);

    std::array<std::uint8_t, 20> ip{};
    const auto total = static_cast<std::uint16_t>(40 + p.payload_len);
    ip[0] = 0x45;
    ip[2] = total >> 8;
    ip[3] = total & 0xff;
    ip[6] = 0x40;  // DF
    ip[8] = 64;
    ip[9] = kProtoTcp;
    for (int i = 0; i < 4; ++i) {
      ip[12 + i] = (p.src_ip.value >> (24 - 8 * i)) & 0xff;
      ip[16 + i] = (p.dst_ip.value >> (24 - 8 * i)) & 0xff;
    }
    const std::uint16_t csum = ipv4_checksum(ip);
    ip[10] = csum >> 8;
    ip[11] = csum & 0xff;
    for (auto b : ip) w.u8(b);

    w.be16(p.src_port);
    w.be16(p.dst_port);
    w.be32(0);  // seq
    w.be32(0);  // ack
    w.u8(5 << 4);
    w.u8(p.flags);
    w.be16(65535);
    w.be16(0);
    w.be16(0);
    w.zeros(captured_payload);
  }
  return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& pcap_path) {
  auto p = pcap_path;
  p.replace_extension(".labels.json");
  return p;
}

void write_labels(const LabelSidecar& labels, const std::filesystem::path& sidecar) {
  nlohmann::ordered_json j;
  auto ips = nlohmann::ordered_json::array();
  for (const Ipv4 ip : labels.attacker_ips) ips.push_back(ip.str());
  j["attacker_ips"] = std::move(ips);
  j["target_ip"] = labels.target.ip.str();
  j["target_port"] = labels.target.port;
  j["tool"] = labels.tool ? nlohmann::ordered_json(*labels.tool) : nlohmann::ordered_json(nullptr);
  std::ofstream out(sidecar);
  if (!out) throw IoError("cannot write " + sidecar.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + sidecar.string());
}

LabelSidecar read_labels(const std::filesystem::path& sidecar) {
  std::ifstream in(sidecar);
  if (!in) throw IoError("cannot open label sidecar " + sidecar.string());
  LabelSidecar labels;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& ip : j.at("attacker_ips")) labels.attacker_ips.insert(Ipv4::parse(ip.get<std::string>()));
    labels.target.ip = Ipv4::parse(j.at("target_ip").get<std::string>());
    const int port = j.at("target_port").get<int>();
    if (port < 0 || port > 65535) throw FormatError("target_port out of range");
    labels.target.port = static_cast<std::uint16_t>(port);
    if (j.contains("tool") && !j.at("tool").is_null()) labels.tool = j.at("tool").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("label sidecar " + sidecar.string() + ": " + e.what());
  }
  return labels;
}

void write_trace(const LabeledTrace& trace, const std::filesystem::path& path,
                 const WriteOptions& options) {
  const auto bytes = encode_pcap(trace, options);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
  }
  write_labels({trace.attacker_ips, trace.target, trace.tool}, sidecar_path(path));
}

PcapReadResult load_labeled_trace(const std::filesystem::path& pcap_path) {
  const auto labels = read_labels(sidecar_path(pcap_path));
  auto result = read_pcap(pcap_path, labels.target);
  result.trace.attacker_ips = labels.attacker_ips;
  result.trace.tool = labels.tool;
  return result;
}

}  // namespace slowdos
