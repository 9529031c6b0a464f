#include "slowdos/schemes.hpp"

#include <array>
#include <utility>

#include "slowdos/errors.hpp"

namespace slowdos {

namespace {

constexpr std::array<std::pair<Scheme, std::string_view>, 6> kNames{{
    {Scheme::LC, "lc"},
    {Scheme::LPR, "lpr"},
    {Scheme::PDU, "pdu"},
    {Scheme::LPR_PDU, "lpr-pdu"},
    {Scheme::MPR, "mpr"},
    {Scheme::PRV, "prv"},
}};

double need(const std::optional<double>& t, const char* what, const SchemeConfig& cfg) {
  if (!t) {
    throw ConfigError(std::string("scheme ") + std::string(scheme_name(cfg.scheme)) +
                      " has no " + what + " threshold");
  }
  return *t;
}

void require_scheme(bool ok, const char* predicate, const SchemeConfig& cfg) {
  if (!ok) {
    throw ConfigError(std::string(predicate) + " called with scheme " +
                      std::string(scheme_name(cfg.scheme)));
  }
}

}  // namespace

std::string_view scheme_name(Scheme s) {
  for (const auto& [scheme, name] : kNames) {
    if (scheme == s) return name;
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  for (const auto& [scheme, n] : kNames) {
    if (n == name) return scheme;
  }
  if (name == "lpr_pdu") return Scheme::LPR_PDU;
  throw ConfigError("unknown scheme '" + std::string(name) +
                    "' (expected lc, lpr, pdu, lpr-pdu, mpr or prv)");
}

void SchemeConfig::validate() const {
  const Thresholds& t = thresholds;
  const bool wants[5] = {
      scheme == Scheme::LC,
      scheme == Scheme::LPR || scheme == Scheme::LPR_PDU,
      scheme == Scheme::PDU || scheme == Scheme::LPR_PDU,
      scheme == Scheme::MPR,
      scheme == Scheme::PRV,
  };
  const std::optional<double>* values[5] = {&t.duration, &t.rate, &t.distance_diff,
                                            &t.mean_rate, &t.rate_variance};
  const char* names[5] = {"d", "p", "delta", "pbar", "var"};
  for (int i = 0; i < 5; ++i) {
    const auto& v = *values[i];
    if (wants[i] && !v) {
      throw ConfigError("scheme " + std::string(scheme_name(scheme)) + " requires threshold '" +
                        names[i] + "'");
    }
    if (!wants[i] && v) {
      throw ConfigError("threshold '" + std::string(names[i]) + "' does not apply to scheme " +
                        std::string(scheme_name(scheme)));
    }
    if (v && !(*v > 0.0)) {
      throw ConfigError("threshold '" + std::string(names[i]) + "' must be positive");
    }
  }
  if (strikes_required < 1) throw ConfigError("strikes must be >= 1");
}

bool lc_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg) {
  require_scheme(cfg.scheme == Scheme::LC, "lc_suspicious", cfg);
  return s.duration > need(cfg.thresholds.duration, "d", cfg);
}

bool lpr_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg) {
  require_scheme(cfg.scheme == Scheme::LPR || cfg.scheme == Scheme::LPR_PDU, "lpr_suspicious", cfg);
  const double limit = need(cfg.thresholds.rate, "p", cfg);
  return s.rate && *s.rate < limit;
}

bool pdu_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg) {
  require_scheme(cfg.scheme == Scheme::PDU || cfg.scheme == Scheme::LPR_PDU, "pdu_suspicious", cfg);
  const double limit = need(cfg.thresholds.distance_diff, "delta", cfg);
  return s.distance_diff && *s.distance_diff < limit;
}

bool lpr_pdu_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg) {
  require_scheme(cfg.scheme == Scheme::LPR_PDU, "lpr_pdu_suspicious", cfg);
  return lpr_suspicious(s, cfg) && pdu_suspicious(s, cfg);
}

bool mpr_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg) {
  require_scheme(cfg.scheme == Scheme::MPR, "mpr_suspicious", cfg);
  const double limit = need(cfg.thresholds.mean_rate, "pbar", cfg);
  return s.mean_rate && *s.mean_rate < limit;
}

bool prv_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg) {
  require_scheme(cfg.scheme == Scheme::PRV, "prv_suspicious", cfg);
  const double limit = need(cfg.thresholds.rate_variance, "var", cfg);
  return s.rate_variance && *s.rate_variance < limit;
}

bool is_suspicious(const MetricSnapshot& s, const SchemeConfig& cfg) {
  // Sweep snapshots only carry a duration.
  if (s.from_sweep && cfg.scheme != Scheme::LC) return false;
  switch (cfg.scheme) {
    case Scheme::LC: return lc_suspicious(s, cfg);
    case Scheme::LPR: return lpr_suspicious(s, cfg);
    case Scheme::PDU: return pdu_suspicious(s, cfg);
    case Scheme::LPR_PDU: return lpr_pdu_suspicious(s, cfg);
    case Scheme::MPR: return mpr_suspicious(s, cfg);
    case Scheme::PRV: return prv_suspicious(s, cfg);
  }
  return false;
}

std::optional<double> scheme_metric(const MetricSnapshot& s, Scheme scheme) {
  switch (scheme) {
    case Scheme::LC: return s.duration;
    case Scheme::LPR: return s.rate;
    case Scheme::PDU: return s.distance_diff;
    case Scheme::MPR: return s.mean_rate;
    case Scheme::PRV: return s.rate_variance;
    case Scheme::LPR_PDU: break;
  }
  throw ConfigError("lpr-pdu has two metrics");
}

void StrikeRegistry::observe(Ipv4 client, Micros ts) {
  auto [it, inserted] = entries_.try_emplace(client);
  if (inserted) it->second.first_seen_ts = ts;
}

std::optional<ClassificationEvent> StrikeRegistry::apply_strike(Ipv4 client, Micros arrival_ts,
                                                                bool suspicious,
                                                                const SchemeConfig& cfg) {
  auto [it, inserted] = entries_.try_emplace(client);
  Entry& e = it->second;
  if (inserted) e.first_seen_ts = arrival_ts;
  if (!suspicious || e.classified) return std::nullopt;
  if (++e.strikes < cfg.strikes_required) return std::nullopt;
  e.classified = true;
  return ClassificationEvent{client, cfg.scheme, arrival_ts, e.first_seen_ts};
}

bool StrikeRegistry::is_classified(Ipv4 client) const {
  const Entry* e = find(client);
  return e && e->classified;
}

const StrikeRegistry::Entry* StrikeRegistry::find(Ipv4 client) const {
  auto it = entries_.find(client);
  return it == entries_.end() ? nullptr : &it->second;
}

}  // namespace slowdos
