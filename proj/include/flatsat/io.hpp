#pragma once

// File formats: point-set JSON, outcome and report JSON, family JSONL, sweep
// CSV, and run manifests.

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "flatsat/randomturan.hpp"
#include "flatsat/supersat.hpp"

namespace flatsat {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

namespace detail {

inline std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t t = 0; t < offset && t < text.size(); ++t) {
    if (text[t] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Byte offset of the i-th entry of the top-level "points" array, if found.
inline std::optional<std::size_t> point_offset(std::string_view text, std::size_t i) {
  auto key = text.find("\"points\"");
  if (key == std::string_view::npos) return std::nullopt;
  auto open = text.find('[', key);
  if (open == std::string_view::npos) return std::nullopt;
  int depth = 0;
  std::size_t seen = 0;
  for (std::size_t t = open; t < text.size(); ++t) {
    char c = text[t];
    if (c == '[') {
      ++depth;
      if (depth == 2 && seen++ == i) return t;
    } else if (c == ']') {
      if (--depth == 0) break;
    }
  }
  return std::nullopt;
}

inline std::string locate(std::string_view text, std::size_t offset) {
  auto [l, c] = line_col(text, offset);
  return "line " + std::to_string(l) + ":" + std::to_string(c);
}

}  // namespace detail

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::ParseError, "cannot write '" + path + "'");
  out << body;
}

inline Json field_json(const Field& f) {
  Json r = Json::array();
  for (auto c : f.reduction()) r.push_back(c);
  return Json{{"p", f.p()}, {"k", f.k()}, {"reduction", r}};
}

inline Json point_set_json(const PointSet& x) {
  Json pts = Json::array();
  for (std::size_t i = 0; i < x.size(); ++i) pts.push_back(x.point(i));
  return Json{{"field", field_json(x.field())}, {"d", x.dim()}, {"points", pts}};
}

// Parses and validates point-set JSON; errors are ParseError with a location.
inline PointSet parse_point_set(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::ParseError, detail::locate(text, e.byte > 0 ? e.byte - 1 : 0) + ": malformed JSON");
  }
  auto where = [&](std::string_view key) {
    auto at = text.find("\"" + std::string(key) + "\"");
    return at == std::string_view::npos ? std::string("line 1:1") : detail::locate(text, at);
  };
  if (!j.is_object()) fail(ErrorKind::ParseError, "line 1:1: top level must be an object");
  if (!j.contains("field") || !j["field"].is_object()) fail(ErrorKind::ParseError, "line 1:1: missing field spec");
  const Json& fj = j["field"];
  for (const char* key : {"p", "k"})
    if (!fj.contains(key) || !fj[key].is_number_unsigned()) fail(ErrorKind::ParseError, where("field") + ": field." + key + " must be a positive integer");
  if (!j.contains("d") || !j["d"].is_number_integer() || j["d"].get<long long>() < 1 || j["d"].get<long long>() > 16)
    fail(ErrorKind::ParseError, where("d") + ": d must be an integer in 1..16");
  if (!j.contains("points") || !j["points"].is_array()) fail(ErrorKind::ParseError, where("points") + ": points must be an array");
  Field f = [&] {
    try {
      auto p = fj["p"].get<std::uint64_t>(), k = fj["k"].get<std::uint64_t>();
      if (p > 65536 || k < 1 || k > 32) fail(ErrorKind::BadParams, "field too large");
      std::uint64_t q = 1;
      for (std::uint64_t t = 0; t < k; ++t) {
        q *= p;
        if (q > (1ULL << 24)) fail(ErrorKind::BadParams, "field too large");
      }
      Field base = make_field(q);
      if (base.p() != p || base.k() != k) fail(ErrorKind::NotPrimePower, "p must be prime");
      if (!fj.contains("reduction")) return base;
      if (!fj["reduction"].is_array()) fail(ErrorKind::BadParams, "reduction must be an array");
      detail::Poly red;
      for (const auto& c : fj["reduction"]) {
        if (!c.is_number_unsigned()) fail(ErrorKind::BadParams, "reduction coefficients must be nonnegative integers");
        red.push_back(c.get<std::uint32_t>());
      }
      if (k == 1 && red == base.reduction()) return base;
      return Field::with_reduction(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(k), red);
    } catch (const Error& e) {
      fail(ErrorKind::ParseError, where("field") + ": " + e.what());
    }
  }();
  const int d = static_cast<int>(j["d"].get<long long>());
  Space space(f, d);
  PointSet x(space);
  const Json& pts = j["points"];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto at = [&] {
      auto off = detail::point_offset(text, i);
      return off ? detail::locate(text, *off) : where("points");
    };
    const Json& pj = pts[i];
    if (!pj.is_array() || pj.size() != static_cast<std::size_t>(d))
      fail(ErrorKind::ParseError, at() + ": point " + std::to_string(i) + " must have " + std::to_string(d) + " coordinates");
    Point pt;
    for (const auto& c : pj) {
      if (!c.is_number_unsigned() || c.get<std::uint64_t>() >= f.q())
        fail(ErrorKind::ParseError, at() + ": coordinate out of range in point " + std::to_string(i));
      pt.push_back(c.get<Elem>());
    }
    try {
      x.push_back(pt);
    } catch (const Error& e) {
      fail(ErrorKind::ParseError, at() + ": " + (e.kind() == ErrorKind::BadPoint ? "duplicate point at index " + std::to_string(i) : std::string(e.what())));
    }
  }
  return x;
}

inline PointSet load_point_set(const std::string& path) {
  std::string text = read_file(path);
  try {
    return parse_point_set(text);
  } catch (const Error& e) {
    fail(e.kind(), path + ": " + std::string(e.what()).substr(std::string(to_string(e.kind())).size() + 2));
  }
}

inline Json rational_json(const Rational& r) { return Json(to_string(r)); }

inline Json index_sets_json(const std::vector<IndexSet>& v) {
  Json a = Json::array();
  for (const auto& s : v) a.push_back(s);
  return a;
}

inline Json outcome_json(const ClassificationOutcome& o) {
  Json j;
  j["case"] = std::string(to_string(o.tag));
  j["i"] = o.i;
  j["j"] = o.j;
  j["n"] = o.n;
  j["eps"] = rational_json(o.eps);
  Json h;
  h["gamma"] = rational_json(o.hierarchy.gamma);
  h["beta"] = Json::array();
  for (auto& b : o.hierarchy.beta) h["beta"].push_back(to_string(b));
  h["eps"] = Json::array();
  for (auto& e : o.hierarchy.eps) h["eps"].push_back(to_string(e));
  j["hierarchy"] = h;
  j["below_size_threshold"] = o.below_size_threshold;
  j["coplanar_count"] = o.coplanar_count.str();
  if (o.coplanar_sampled) {
    j["coplanar_sampled"] = {{"samples", o.coplanar_sampled->samples}, {"hits", o.coplanar_sampled->hits},
                             {"estimate", o.coplanar_sampled->estimate}, {"ci_low", o.coplanar_sampled->ci_low},
                             {"ci_high", o.coplanar_sampled->ci_high}};
  }
  Json th;
  th["structure"] = rational_json(o.structure_threshold);
  th["window"] = Json::array();
  for (auto& w : o.window_thresholds) th["window"].push_back(to_string(w));
  th["level"] = Json::array();
  for (auto& w : o.level_thresholds) th["level"].push_back(to_string(w));
  j["thresholds"] = th;
  Json ws = Json::array();
  for (auto& w : o.window_sums) ws.push_back(w.str());
  j["window_sums"] = ws;
  auto grid = [](const std::vector<std::vector<BigInt>>& g) {
    Json a = Json::array();
    for (auto& row : g) {
      Json r = Json::array();
      for (auto& v : row) r.push_back(v.str());
      a.push_back(r);
    }
    return a;
  };
  j["a_counts"] = grid(o.a_counts);
  j["balanced_counts"] = grid(o.balanced_counts);
  j["balanced_sets"] = index_sets_json(o.balanced_sets);
  Json goods = Json::array();
  for (const auto& g : o.good_sets) goods.push_back({{"J", g.J}, {"partition", index_sets_json(g.partition)}, {"root", g.root}});
  j["good_sets"] = goods;
  if (!o.note.empty()) j["note"] = o.note;
  return j;
}

inline std::string family_jsonl(const CoplanarFamily& f) {
  std::string out;
  for (const auto& m : f.members) out += Json(m).dump() + "\n";
  return out;
}

inline Json bounds_json(const BoundsReport& b) {
  Json j;
  j["C"] = rational_json(b.C);
  j["c1"] = b.c1;
  j["c1_pass"] = b.c1_pass;
  Json c2 = Json::array(), delta = Json::array(), pass = Json::array();
  for (std::size_t t = 1; t < b.c2.size(); ++t) {
    c2.push_back(b.c2[t]);
    delta.push_back(b.delta[t]);
    pass.push_back(bool(b.c2_pass[t]));
  }
  j["c2"] = c2;
  j["delta"] = delta;
  j["c2_pass"] = pass;
  return j;
}

inline Json stats_json(const ConstructStats& s) {
  Json j;
  j["candidates"] = s.candidates;
  j["sum_p"] = s.sum_p;
  j["expected_size"] = s.expected_size;
  j["variance"] = s.variance;
  j["expectation_exact"] = s.expectation_exact;
  j["skips"] = Json::object();
  for (auto& [k, v] : s.skips) j["skips"][k] = v;
  j["map_outputs"] = s.map_outputs;
  j["map_cases"] = Json::object();
  for (auto& [k, v] : s.map_cases) j["map_cases"][k] = v;
  j["max_preimage"] = s.max_preimage;
  j["aux_graphs_built"] = s.aux_graphs_built;
  j["aux_graphs_failed"] = s.aux_graphs_failed;
  j["aux_graph_violations"] = s.aux_graph_violations;
  j["log"] = s.log;
  return j;
}

inline Json construct_report_json(const ConstructResult& r, const BoundsReport& b, std::uint64_t seed) {
  Json j;
  j["seed"] = seed;
  j["case"] = std::string(to_string(r.outcome.tag));
  j["i"] = r.outcome.i;
  j["j"] = r.outcome.j;
  j["family_size"] = r.family.members.size();
  j["outcome"] = outcome_json(r.outcome);
  j["stats"] = stats_json(r.stats);
  j["bounds"] = bounds_json(b);
  if (r.structure_pool) j["structure_pool"] = {{"size", r.structure_pool->sets.size()}, {"exact", r.structure_pool->exact}};
  if (r.audit.built || r.audit.skipped)
    j["aux_audit"] = {{"built", r.audit.built}, {"skipped", r.audit.skipped}, {"violations", r.audit.violations}, {"notes", r.audit.notes}};
  return j;
}

inline CoplanarFamily parse_family_jsonl(std::string_view text, std::size_t ground_size, int d) {
  CoplanarFamily f{ground_size, d, 0, {}};
  std::size_t line = 0, pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view row = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line;
    if (row.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Json j;
    try {
      j = Json::parse(row.begin(), row.end());
    } catch (const nlohmann::json::parse_error&) {
      fail(ErrorKind::ParseError, "line " + std::to_string(line) + ": malformed JSON");
    }
    if (!j.is_array() || j.size() != static_cast<std::size_t>(d) + 1)
      fail(ErrorKind::ParseError, "line " + std::to_string(line) + ": member must list " + std::to_string(d + 1) + " indices");
    Member m;
    for (const auto& v : j) {
      if (!v.is_number_unsigned() || v.get<std::uint64_t>() >= ground_size) fail(ErrorKind::ParseError, "line " + std::to_string(line) + ": index out of range");
      m.push_back(v.get<Index>());
    }
    std::sort(m.begin(), m.end());
    if (std::adjacent_find(m.begin(), m.end()) != m.end()) fail(ErrorKind::ParseError, "line " + std::to_string(line) + ": repeated index");
    f.members.push_back(std::move(m));
  }
  detail::finalize(f);
  return f;
}

inline std::string sweep_csv(const SweepConfig& cfg, const std::vector<SweepRow>& rows) {
  std::string out = "q,d,p_num,p_den,trial,sample_size,alpha,mode,millis\n";
  for (const auto& r : rows) {
    out += std::to_string(cfg.q) + "," + std::to_string(cfg.d) + "," + boost::multiprecision::numerator(r.p).str() + "," +
           boost::multiprecision::denominator(r.p).str() + "," + std::to_string(r.trial) + "," + std::to_string(r.sample_size) + "," +
           std::to_string(r.alpha) + "," + r.mode + "," + std::to_string(r.millis) + "\n";
  }
  return out;
}

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) fail(ErrorKind::InvariantViolation, "SHA-256 failed");
  std::ostringstream ss;
  for (unsigned t = 0; t < len; ++t) ss << std::hex << std::setw(2) << std::setfill('0') << int(md[t]);
  return ss.str();
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

struct RunManifest {
  std::string command;
  Json parameters = Json::object();
  std::uint64_t seed = 0;
  std::string input_digest;  // empty when the command has no input file
  std::chrono::system_clock::time_point started, finished;
  int exit_code = 0;

  Json to_json() const {
    Json j;
    j["command"] = command;
    j["parameters"] = parameters;
    j["seed"] = seed;
    j["version"] = kVersion;
    j["input_sha256"] = input_digest.empty() ? Json(nullptr) : Json(input_digest);
    j["started"] = utc_timestamp(started);
    j["finished"] = utc_timestamp(finished);
    j["exit_code"] = exit_code;
    return j;
  }
};

}  // namespace flatsat
