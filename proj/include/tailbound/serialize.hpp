#ifndef TAILBOUND_SERIALIZE_HPP
#define TAILBOUND_SERIALIZE_HPP

#include <charconv>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "tailbound/bennett.hpp"
#include "tailbound/error.hpp"
#include "tailbound/hoeffding.hpp"
#include "tailbound/oracle.hpp"
#include "tailbound/special_functions.hpp"

namespace tailbound {

using json = nlohmann::json;

inline const char* to_string(RootMethod m) {
  switch (m) {
    case RootMethod::logarithm: return "logarithm";
    case RootMethod::lambert: return "lambert";
    case RootMethod::scan: return "scan";
  }
  return "scan";
}

inline RootMethod root_method_from_string(const std::string& s) {
  if (s == "logarithm") return RootMethod::logarithm;
  if (s == "lambert") return RootMethod::lambert;
  if (s == "scan") return RootMethod::scan;
  detail::fail(ErrorKind::config, "unknown root method '" + s + "'");
}

inline void to_json(json& j, const ScanGrid& g) {
  j = json{{"max_abscissa", g.max_abscissa}, {"step", g.step}, {"extensions", g.extensions}};
}
inline void from_json(const json& j, ScanGrid& g) {
  j.at("max_abscissa").get_to(g.max_abscissa);
  j.at("step").get_to(g.step);
  j.at("extensions").get_to(g.extensions);
}

inline void to_json(json& j, const RootSet& r) {
  j = json{{"roots", r.roots}, {"bracket_grid", r.bracket_grid}, {"unique", r.unique},
           {"method", to_string(r.method)}};
}
inline void from_json(const json& j, RootSet& r) {
  j.at("roots").get_to(r.roots);
  j.at("bracket_grid").get_to(r.bracket_grid);
  j.at("unique").get_to(r.unique);
  r.method = root_method_from_string(j.at("method").get<std::string>());
}

inline void to_json(json& j, const HoeffdingBound& h) {
  j = json{{"t", h.t},
           {"p", h.p},
           {"bound", h.bound},
           {"c_values", h.c_values},
           {"d_n", h.d_n ? json(*h.d_n) : json(nullptr)},
           {"s_star", h.s_star},
           {"mode", to_string(h.mode)}};
}
inline void from_json(const json& j, HoeffdingBound& h) {
  j.at("t").get_to(h.t);
  j.at("p").get_to(h.p);
  j.at("bound").get_to(h.bound);
  j.at("c_values").get_to(h.c_values);
  const auto& d = j.at("d_n");
  h.d_n = d.is_null() ? std::nullopt : std::optional<double>(d.get<double>());
  j.at("s_star").get_to(h.s_star);
  h.mode = hoeffding_mode_from_string(j.at("mode").get<std::string>());
}

inline void to_json(json& j, const BennettBound& b) {
  j = json{{"t", b.t},
           {"p", b.p},
           {"bound", b.bound},
           {"alpha", b.alpha},
           {"roots", b.roots},
           {"y_star", b.y_star},
           {"b", b.b},
           {"aggregated_moments", b.aggregated_moments}};
  if (b.w_residual) j["w_residual"] = *b.w_residual;
}
inline void from_json(const json& j, BennettBound& b) {
  j.at("t").get_to(b.t);
  j.at("p").get_to(b.p);
  j.at("bound").get_to(b.bound);
  j.at("alpha").get_to(b.alpha);
  j.at("roots").get_to(b.roots);
  j.at("y_star").get_to(b.y_star);
  j.at("b").get_to(b.b);
  if (j.contains("aggregated_moments")) j.at("aggregated_moments").get_to(b.aggregated_moments);
  if (j.contains("w_residual")) b.w_residual = j.at("w_residual").get<double>();
}

inline void to_json(json& j, const TailEstimate& e) {
  j = json{{"t", e.t}, {"probability", e.probability}, {"stderr", e.std_error},
           {"trials", e.trials}, {"seed", e.seed}};
}
inline void from_json(const json& j, TailEstimate& e) {
  j.at("t").get_to(e.t);
  j.at("probability").get_to(e.probability);
  j.at("stderr").get_to(e.std_error);
  j.at("trials").get_to(e.trials);
  j.at("seed").get_to(e.seed);
}

inline void to_json(json& j, const SampleSizeResult& s) {
  j = json{{"n", s.n},
           {"classical_n", s.classical_n},
           {"c_bar", s.c_bar},
           {"c_shifted", s.c_shifted},
           {"c_reflected", s.c_reflected},
           {"alpha", s.alpha},
           {"t", s.t},
           {"p", s.p},
           {"fallback", s.fallback}};
}
inline void from_json(const json& j, SampleSizeResult& s) {
  j.at("n").get_to(s.n);
  j.at("classical_n").get_to(s.classical_n);
  j.at("c_bar").get_to(s.c_bar);
  j.at("c_shifted").get_to(s.c_shifted);
  j.at("c_reflected").get_to(s.c_reflected);
  j.at("alpha").get_to(s.alpha);
  j.at("t").get_to(s.t);
  j.at("p").get_to(s.p);
  j.at("fallback").get_to(s.fallback);
}

/// Locale-independent text for a double with 17 significant digits.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (res.ec != std::errc{}) detail::fail(ErrorKind::domain, "cannot format number");
  return std::string(buf, res.ptr);
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(fields[i]);
  }
  os << "\r\n";
}

}  // namespace tailbound

#endif  // TAILBOUND_SERIALIZE_HPP
