#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "slowdos/flow_tracker.hpp"

namespace slowdos {

enum class Scheme { LC, LPR, PDU, LPR_PDU, MPR, PRV };

inline constexpr Scheme kAllSchemes[] = {Scheme::LC,      Scheme::LPR,
                                         Scheme::PDU,     Scheme::LPR_PDU,
                                         Scheme::MPR,     Scheme::PRV};

/// "lc", "lpr", "pdu", "lpr-pdu", "mpr", "prv".
std::string_view scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);

/// LC flags values above its threshold; every other scheme flags values
/// below.
constexpr bool high_is_suspicious(Scheme s) { return s == Scheme::LC; }

struct Thresholds {
  std::optional<double> duration;       // d, seconds (LC)
  std::optional<double> rate;           // p, Hz (LPR, LPR_PDU)
  std::optional<double> distance_diff;  // Δ, seconds (PDU, LPR_PDU)
  std::optional<double> mean_rate;      // p̄, Hz (MPR)
  std::optional<double> rate_variance;  // σ², Hz² (PRV)

  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct SchemeConfig {
  Scheme scheme = Scheme::LPR;
  Thresholds thresholds;
  bool include_handshake = true;
  int strikes_required = 1;

  /// Throws ConfigError unless exactly the scheme's thresholds are set, all
  /// positive, and strikes_required >= 1.
  void validate() const;

  /// LC measures duration from the very first client packet regardless of
  /// the configured handshake toggle.
  bool effective_handshake() const {
    return scheme == Scheme::LC ? true : include_handshake;
  }

  friend bool operator==(const SchemeConfig&, const SchemeConfig&) = default;
};

bool lc_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg);
bool lpr_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg);
bool pdu_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg);
bool lpr_pdu_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg);
bool mpr_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg);
bool prv_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg);

/// Dispatches on cfg.scheme.
bool is_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg);

/// The single metric a one-threshold scheme compares against its threshold.
std::optional<double> scheme_metric(const MetricSnapshot& s, Scheme scheme);

struct ClassificationEvent {
  Ipv4 client_ip;
  Scheme scheme = Scheme::LPR;
  Micros detection_ts = 0;
  Micros first_seen_ts = 0;

  double detection_time() const { return to_seconds(detection_ts - first_seen_ts); }

  friend bool operator==(const ClassificationEvent&, const ClassificationEvent&) = default;
};

/// Per-client strike counts. Strikes never decay and a client is classified
/// at most once.
class StrikeRegistry {
 public:
  struct Entry {
    int strikes = 0;
    Micros first_seen_ts = 0;
    bool classified = false;
  };

  /// Records a metric-eligible packet; the first call fixes first_seen_ts.
  void observe(Ipv4 client, Micros ts);

  std::optional<ClassificationEvent> apply_strike(Ipv4 client, Micros arrival_ts,
                                                  bool suspicious,
                                                  const SchemeConfig& cfg);

  bool is_classified(Ipv4 client) const;
  const Entry* find(Ipv4 client) const;

 private:
  std::unordered_map<Ipv4, Entry, Ipv4Hash> entries_;
};

}  // namespace slowdos
