/**
 * Copyright 2026 The HFL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Config loading. Every problem found is collected before reporting, so a
// broken config lists all of its violations at once.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hfl/error.hpp"
#include "hfl/harness.hpp"

namespace hfl {

using json = nlohmann::json;

namespace {

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void fail(const std::string& path, const std::string& what) { errors_.push_back(path + ": " + what); }

  const json* object(const json& parent, const char* key, const std::string& path, bool required) {
    if (!parent.is_object() || !parent.contains(key)) {
      if (required) fail(path, std::string("missing \"") + key + "\"");
      return nullptr;
    }
    const json& v = parent.at(key);
    if (!v.is_object()) {
      fail(path + "." + key, "expected an object");
      return nullptr;
    }
    return &v;
  }

  std::optional<std::size_t> count(const json& parent, const char* key, const std::string& path, bool required,
                                   std::size_t min = 0) {
    if (!parent.contains(key)) {
      if (required) fail(path, std::string("missing \"") + key + "\"");
      return std::nullopt;
    }
    const json& v = parent.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(min)) {
      fail(path + "." + key, "expected an integer >= " + std::to_string(min));
      return std::nullopt;
    }
    return v.get<std::size_t>();
  }

  std::optional<double> number(const json& parent, const char* key, const std::string& path, bool required) {
    if (!parent.contains(key)) {
      if (required) fail(path, std::string("missing \"") + key + "\"");
      return std::nullopt;
    }
    const json& v = parent.at(key);
    if (!v.is_number()) {
      fail(path + "." + key, "expected a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<std::string> string(const json& parent, const char* key, const std::string& path, bool required) {
    if (!parent.contains(key)) {
      if (required) fail(path, std::string("missing \"") + key + "\"");
      return std::nullopt;
    }
    const json& v = parent.at(key);
    if (!v.is_string()) {
      fail(path + "." + key, "expected a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

 private:
  std::vector<std::string>& errors_;
};

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

std::optional<SubNetwork> parse_network(Reader& rd, const json& spec, const std::string& path, AgentId first) {
  if (!spec.is_object()) {
    rd.fail(path, "expected an object");
    return std::nullopt;
  }
  std::optional<std::size_t> size = rd.count(spec, "size", path, false, 1);
  if (spec.contains("adjacency")) {
    const json& adj = spec.at("adjacency");
    if (!adj.is_array() || adj.empty()) {
      rd.fail(path + ".adjacency", "expected a non-empty array of out-neighbor lists");
      return std::nullopt;
    }
    if (size && *size != adj.size()) rd.fail(path, "size disagrees with the adjacency list length");
    size = adj.size();
  }
  if (!size) {
    rd.fail(path, "missing \"size\"");
    return std::nullopt;
  }
  const std::size_t n = *size;
  auto local = [&](const json& v, const std::string& where) -> std::optional<AgentId> {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::size_t>() >= n) {
      rd.fail(where, "agent index must be an integer in [0, " + std::to_string(n) + ")");
      return std::nullopt;
    }
    return first + v.get<std::size_t>();
  };

  std::vector<AgentId> agents(n);
  for (std::size_t k = 0; k < n; ++k) agents[k] = first + k;
  std::vector<Edge> edges;
  bool ok = true;
  const int styles = spec.contains("generator") + spec.contains("edges") + spec.contains("adjacency");
  if (styles != 1) {
    rd.fail(path, "give exactly one of \"generator\", \"edges\" or \"adjacency\"");
    return std::nullopt;
  }
  if (spec.contains("generator")) {
    const auto gen = rd.string(spec, "generator", path, true);
    if (!gen) return std::nullopt;
    if (*gen == "complete") return SubNetwork::complete(first, n);
    if (*gen == "ring") return SubNetwork::ring(first, n, false);
    if (*gen == "bidirectional_ring") return SubNetwork::ring(first, n, true);
    rd.fail(path + ".generator", "unknown generator \"" + *gen + "\" (complete, ring, bidirectional_ring)");
    return std::nullopt;
  }
  if (spec.contains("edges")) {
    const json& list = spec.at("edges");
    if (!list.is_array()) {
      rd.fail(path + ".edges", "expected an array of [from, to] pairs");
      return std::nullopt;
    }
    for (std::size_t e = 0; e < list.size(); ++e) {
      const std::string where = path + ".edges[" + std::to_string(e) + "]";
      if (!list[e].is_array() || list[e].size() != 2) {
        rd.fail(where, "expected [from, to]");
        ok = false;
        continue;
      }
      const auto a = local(list[e][0], where), b = local(list[e][1], where);
      if (!a || !b) {
        ok = false;
        continue;
      }
      if (*a == *b) {
        rd.fail(where, "self-loops are not allowed");
        ok = false;
        continue;
      }
      edges.push_back({*a, *b});
    }
  } else {
    const json& adj = spec.at("adjacency");
    for (std::size_t k = 0; k < n; ++k) {
      const std::string where = path + ".adjacency[" + std::to_string(k) + "]";
      if (!adj[k].is_array()) {
        rd.fail(where, "expected an array of out-neighbors");
        ok = false;
        continue;
      }
      for (const json& v : adj[k]) {
        const auto b = local(v, where);
        if (!b) {
          ok = false;
          continue;
        }
        if (*b == first + k) {
          rd.fail(where, "self-loops are not allowed");
          ok = false;
          continue;
        }
        edges.push_back({first + k, *b});
      }
    }
  }
  if (!ok) return std::nullopt;
  return SubNetwork(std::move(agents), std::move(edges));
}

std::optional<std::vector<std::vector<double>>> parse_rows(Reader& rd, const json& rows, const std::string& path) {
  if (!rows.is_array() || rows.empty()) {
    rd.fail(path, "expected an array of probability rows");
    return std::nullopt;
  }
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].empty()) {
      rd.fail(path + "[" + std::to_string(i) + "]", "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> row;
    for (const json& v : rows[i]) {
      if (!v.is_number()) {
        rd.fail(path + "[" + std::to_string(i) + "]", "expected numbers");
        return std::nullopt;
      }
      row.push_back(v.get<double>());
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::optional<Strategy> parse_strategy(Reader& rd, const json& spec, const std::string& path) {
  const auto name = rd.string(spec, "strategy", path, true);
  if (!name) return std::nullopt;
  if (*name == "constant") {
    const auto v = rd.number(spec, "value", path, true);
    if (!v) return std::nullopt;
    return strategy::Constant{*v};
  }
  if (*name == "negate") return strategy::Negate{};
  if (*name == "amplify") return strategy::Amplify{rd.number(spec, "kappa", path, false).value_or(10.0)};
  if (*name == "random") {
    const double lo = rd.number(spec, "low", path, false).value_or(-1.0);
    const double hi = rd.number(spec, "high", path, false).value_or(1.0);
    if (!(lo < hi)) {
      rd.fail(path, "random strategy needs low < high");
      return std::nullopt;
    }
    return strategy::Random{lo, hi};
  }
  if (*name == "collude_extreme") return strategy::ColludeExtreme{rd.number(spec, "magnitude", path, false).value_or(1e6)};
  rd.fail(path + ".strategy",
          "unknown strategy \"" + *name + "\" (constant, negate, amplify, random, collude_extreme)");
  return std::nullopt;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  auto parse = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
      throw InvalidArgument("bad seed \"" + std::string(s) + "\"");
    }
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) return {parse(text)};
  const std::uint64_t a = parse(std::string_view(text).substr(0, dots));
  const std::uint64_t b = parse(std::string_view(text).substr(dots + 2));
  if (b < a) throw InvalidArgument("seed range " + text + " is empty");
  if (b - a >= 1'000'000) throw InvalidArgument("seed range " + text + " is too long");
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/false);
  } catch (const json::parse_error& e) {
    throw ParseError(line_of(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }
  if (!doc.is_object()) throw ParseError(1, "top level must be a JSON object");

  std::vector<std::string> errors;
  Reader rd(errors);
  ExperimentConfig cfg;

  // ---- topology
  std::vector<SubNetwork> networks;
  std::vector<AgentId> designated;
  std::size_t window_b = 1;
  std::optional<std::size_t> gamma;
  bool gamma_auto = true;
  bool topology_ok = false;
  if (const json* topo = rd.object(doc, "topology", "config", true)) {
    bool ok = true;
    if (!topo->contains("networks") || !topo->at("networks").is_array() || topo->at("networks").empty()) {
      rd.fail("topology.networks", "expected a non-empty array");
      ok = false;
    } else {
      AgentId next = 0;
      const json& list = topo->at("networks");
      for (std::size_t i = 0; i < list.size(); ++i) {
        auto net = parse_network(rd, list[i], "topology.networks[" + std::to_string(i) + "]", next);
        if (!net) {
          ok = false;
          break;  // later ids depend on this network's size
        }
        next += net->size();
        networks.push_back(std::move(*net));
      }
    }
    if (topo->contains("window_b")) {
      if (auto b = rd.count(*topo, "window_b", "topology", true, 1)) {
        window_b = *b;
      } else {
        ok = false;
      }
    }
    if (topo->contains("gamma")) {
      const json& g = topo->at("gamma");
      if (g.is_string() && g.get<std::string>() == "auto") {
        gamma_auto = true;
      } else if (g.is_number_integer() && g.get<std::int64_t>() >= 1) {
        gamma_auto = false;
        gamma = g.get<std::size_t>();
      } else {
        rd.fail("topology.gamma", "expected \"auto\" or an integer >= 1");
        ok = false;
      }
    }
    if (!topo->contains("designated") || !topo->at("designated").is_array()) {
      rd.fail("topology.designated", "expected an array with one agent id per sub-network");
      ok = false;
    } else if (ok) {
      const json& d = topo->at("designated");
      if (d.size() != networks.size()) {
        rd.fail("topology.designated", "expected " + std::to_string(networks.size()) + " entries, got " +
                                           std::to_string(d.size()));
        ok = false;
      }
      for (std::size_t i = 0; i < std::min(d.size(), networks.size()); ++i) {
        if (!d[i].is_number_integer() || d[i].get<std::int64_t>() < 0) {
          rd.fail("topology.designated[" + std::to_string(i) + "]", "expected an agent id");
          ok = false;
          continue;
        }
        const AgentId a = d[i].get<AgentId>();
        if (!networks[i].contains(a)) {
          rd.fail("topology.designated[" + std::to_string(i) + "]",
                  "designated agent " + std::to_string(a) + " is not in sub-network " + std::to_string(i));
          ok = false;
        }
        designated.push_back(a);
      }
    }
    if (ok) {
      for (std::size_t i = 0; i < networks.size(); ++i) {
        try {
          network_diameter(networks[i], i);
        } catch (const NotStronglyConnected& e) {
          rd.fail("topology.networks[" + std::to_string(i) + "]", e.what());
          ok = false;
        }
      }
    }
    if (ok) {
      cfg.topology = gamma_auto
                         ? std::make_shared<SystemTopology>(SystemTopology::with_auto_gamma(networks, designated, window_b))
                         : std::make_shared<SystemTopology>(networks, designated, *gamma, window_b);
      topology_ok = true;
    }
  }
  const std::size_t n_agents = topology_ok ? cfg.topology->agent_count() : 0;

  // ---- signals
  if (const json* sig = rd.object(doc, "signals", "config", false)) {
    const auto m = rd.count(*sig, "hypotheses", "signals", true, 2);
    const auto truth = rd.count(*sig, "truth", "signals", true);
    std::vector<std::string> names;
    if (sig->contains("names")) {
      const json& nm = sig->at("names");
      if (!nm.is_array() || (m && nm.size() != *m)) {
        rd.fail("signals.names", "expected one name per hypothesis");
      } else {
        for (const json& v : nm) names.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      }
    }
    if (m && truth && *truth >= *m) rd.fail("signals.truth", "truth must be < hypotheses");
    std::vector<std::optional<LikelihoodTable>> tables(n_agents);
    if (!sig->contains("tables") || !sig->at("tables").is_array()) {
      rd.fail("signals.tables", "expected an array of table entries");
    } else if (m && topology_ok) {
      const json& list = sig->at("tables");
      for (std::size_t e = 0; e < list.size(); ++e) {
        const std::string path = "signals.tables[" + std::to_string(e) + "]";
        const json& entry = list[e];
        if (!entry.is_object()) {
          rd.fail(path, "expected an object");
          continue;
        }
        std::vector<AgentId> who;
        const json agents_field = entry.value("agents", json("all"));
        if (agents_field.is_string() && agents_field.get<std::string>() == "all") {
          for (AgentId a = 0; a < n_agents; ++a) who.push_back(a);
        } else if (agents_field.is_array()) {
          for (const json& v : agents_field) {
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::size_t>() >= n_agents) {
              rd.fail(path + ".agents", "agent ids must lie in [0, " + std::to_string(n_agents) + ")");
              continue;
            }
            who.push_back(v.get<AgentId>());
          }
        } else {
          rd.fail(path + ".agents", "expected \"all\" or an array of agent ids");
          continue;
        }
        std::optional<LikelihoodTable> table;
        try {
          if (entry.contains("rows")) {
            if (auto rows = parse_rows(rd, entry.at("rows"), path + ".rows")) {
              if (rows->size() != *m) {
                rd.fail(path + ".rows", "expected one row per hypothesis");
              } else {
                table = LikelihoodTable(*rows);
              }
            }
          } else if (const auto gen = rd.string(entry, "generator", path, true)) {
            const double strength = rd.number(entry, "strength", path, false).value_or(0.6);
            if (*gen == "peaked") {
              table = peaked_table(*m, rd.count(entry, "symbols", path, false, 2).value_or(*m), strength);
            } else if (*gen == "threshold") {
              const auto split = rd.count(entry, "split", path, true);
              if (split) table = threshold_table(*m, *split, strength);
            } else {
              rd.fail(path + ".generator", "unknown generator \"" + *gen + "\" (peaked, threshold)");
            }
          }
        } catch (const Error& err) {
          rd.fail(path, err.what());
        }
        if (table)
          for (AgentId a : who) tables[a] = *table;
      }
      std::vector<LikelihoodTable> done;
      for (AgentId a = 0; a < n_agents; ++a) {
        if (!tables[a]) {
          rd.fail("signals.tables", "agent " + std::to_string(a) + " has no likelihood table");
        } else {
          done.push_back(*tables[a]);
        }
      }
      if (done.size() == n_agents && truth && *truth < *m) {
        try {
          cfg.model = std::make_shared<SignalModel>(*m, *truth, std::move(done), names);
        } catch (const Error& err) {
          rd.fail("signals", err.what());
        }
      }
    }
  }

  // ---- faults
  if (const json* f = rd.object(doc, "faults", "config", false)) {
    const std::string mode = rd.string(*f, "mode", "faults", true).value_or("none");
    if (mode == "none") {
      cfg.fault_mode = FaultMode::kNone;
    } else if (mode == "drops") {
      cfg.fault_mode = FaultMode::kDrops;
      const auto p = rd.number(*f, "prob", "faults", true);
      if (p && !(*p >= 0.0 && *p < 1.0)) rd.fail("faults.prob", "drop probability must lie in [0, 1)");
      cfg.drops.prob = p.value_or(0.0);
      const std::string placement = rd.string(*f, "placement", "faults", false).value_or("window_end");
      if (placement == "window_end") {
        cfg.drops.placement = ForcedPlacement::kWindowEnd;
      } else if (placement == "uniform") {
        cfg.drops.placement = ForcedPlacement::kUniform;
      } else {
        rd.fail("faults.placement", "expected \"window_end\" or \"uniform\"");
      }
    } else if (mode == "byzantine") {
      cfg.fault_mode = FaultMode::kByzantine;
      auto& spec = cfg.byzantine;
      spec.plan.f_bound = rd.count(*f, "f", "faults", true).value_or(0);
      if (f->contains("agents")) {
        const json& list = f->at("agents");
        if (!list.is_array()) {
          rd.fail("faults.agents", "expected an array of {id, strategy, ...}");
        } else {
          for (std::size_t k = 0; k < list.size(); ++k) {
            const std::string path = "faults.agents[" + std::to_string(k) + "]";
            const auto id = rd.count(list[k], "id", path, true);
            const auto strat = parse_strategy(rd, list[k], path);
            if (!id || !strat) continue;
            if (*id >= n_agents && topology_ok) {
              rd.fail(path + ".id", "agent " + std::to_string(*id) + " does not exist");
              continue;
            }
            if (!spec.plan.strategies.emplace(*id, *strat).second) rd.fail(path + ".id", "agent listed twice");
          }
        }
      }
      if (f->contains("c_set")) {
        const json& c = f->at("c_set");
        if (!c.is_array()) {
          rd.fail("faults.c_set", "expected an array of sub-network indices");
        } else {
          for (const json& v : c) {
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
              rd.fail("faults.c_set", "expected sub-network indices");
              continue;
            }
            spec.c_set.push_back(v.get<std::size_t>());
          }
        }
      }
      const std::string inn = rd.string(*f, "innovation", "faults", false).value_or("cumulative");
      if (inn == "cumulative") {
        spec.innovation = InnovationMode::kCumulative;
      } else if (inn == "fresh") {
        spec.innovation = InnovationMode::kFresh;
      } else {
        rd.fail("faults.innovation", "expected \"cumulative\" or \"fresh\"");
      }
    } else {
      rd.fail("faults.mode", "expected \"none\", \"drops\" or \"byzantine\"");
    }
  }

  // ---- run
  if (const json* run = rd.object(doc, "run", "config", false)) {
    if (auto r = rd.count(*run, "rounds", "run", false, 0)) cfg.run.rounds = *r;
    if (run->contains("seeds")) {
      const json& s = run->at("seeds");
      try {
        if (s.is_string()) {
          cfg.run.seeds = parse_seed_range(s.get<std::string>());
        } else if (s.is_number_integer() && s.get<std::int64_t>() >= 0) {
          cfg.run.seeds = {s.get<std::uint64_t>()};
        } else if (s.is_array() && !s.empty()) {
          cfg.run.seeds.clear();
          for (const json& v : s) {
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw InvalidArgument("seeds must be >= 0");
            cfg.run.seeds.push_back(v.get<std::uint64_t>());
          }
        } else {
          throw InvalidArgument("expected \"A..B\", an integer or an array of integers");
        }
      } catch (const Error& e) {
        rd.fail("run.seeds", e.what());
      }
    }
    if (auto o = rd.string(*run, "output", "run", false)) cfg.run.output = *o;
    if (auto fmt = rd.string(*run, "format", "run", false)) {
      if (*fmt == "csv") {
        cfg.run.format = OutputFormat::kCsv;
      } else if (*fmt == "jsonl") {
        cfg.run.format = OutputFormat::kJsonl;
      } else {
        rd.fail("run.format", "expected \"csv\" or \"jsonl\"");
      }
    }
    if (auto k = rd.count(*run, "record_every", "run", false, 1)) cfg.run.record_every = *k;
    if (auto d = rd.number(*run, "delta", "run", false)) {
      if (!(*d > 0.0 && *d < 1.0)) rd.fail("run.delta", "delta must lie in (0, 1)");
      cfg.run.delta = *d;
    }
    if (auto b = rd.string(*run, "backend", "run", false)) {
      if (*b == "serial") {
        cfg.run.backend = Backend::kSerial;
      } else if (*b == "openmp") {
        cfg.run.backend = Backend::kOpenMP;
      } else {
        rd.fail("run.backend", "expected \"serial\" or \"openmp\"");
      }
    }
    if (run->contains("inputs")) {
      const json& in = run->at("inputs");
      if (in.is_object()) {
        ExperimentConfig::RandomInputs ri;
        const std::string gen = rd.string(in, "generator", "run.inputs", true).value_or("uniform");
        if (gen != "uniform") rd.fail("run.inputs.generator", "only \"uniform\" is supported");
        ri.low = rd.number(in, "low", "run.inputs", false).value_or(0.0);
        ri.high = rd.number(in, "high", "run.inputs", false).value_or(1.0);
        ri.dimension = rd.count(in, "dimension", "run.inputs", false, 1).value_or(1);
        if (!(ri.low < ri.high)) rd.fail("run.inputs", "need low < high");
        cfg.random_inputs = ri;
      } else if (in.is_array()) {
        std::size_t dim = 0;
        for (std::size_t k = 0; k < in.size(); ++k) {
          std::vector<double> w;
          if (in[k].is_number()) {
            w.push_back(in[k].get<double>());
          } else if (in[k].is_array() && std::all_of(in[k].begin(), in[k].end(), [](const json& v) { return v.is_number(); })) {
            for (const json& v : in[k]) w.push_back(v.get<double>());
          }
          if (w.empty() || (dim != 0 && w.size() != dim)) {
            rd.fail("run.inputs[" + std::to_string(k) + "]", "expected a number or a vector of the common dimension");
            continue;
          }
          dim = w.size();
          cfg.inputs.push_back(std::move(w));
        }
        if (topology_ok && cfg.inputs.size() != n_agents) {
          rd.fail("run.inputs", "expected " + std::to_string(n_agents) + " inputs, got " + std::to_string(in.size()));
        }
      } else {
        rd.fail("run.inputs", "expected an array or a {\"generator\": \"uniform\"} object");
      }
    }
  }
  if (cfg.inputs.empty() && !cfg.random_inputs && topology_ok) {
    for (AgentId a = 0; a < n_agents; ++a) cfg.inputs.push_back({static_cast<double>(a)});
  }

  // ---- cross-checks
  if (cfg.fault_mode == FaultMode::kByzantine && topology_ok) {
    if (!cfg.model) {
      rd.fail("faults", "byzantine mode needs a valid \"signals\" section");
    } else {
      ByzantineOptions opts;
      opts.c_set = cfg.byzantine.c_set;
      for (const auto& v : byzantine_violations(*cfg.topology, *cfg.model, cfg.byzantine.plan, opts)) {
        rd.fail("faults", v);
      }
    }
  }
  for (const auto& [key, _] : doc.items()) {
    static const std::set<std::string> known{"topology", "signals", "faults", "run", "_comment"};
    if (!known.count(key)) rd.fail("config", "unknown section \"" + key + "\"");
  }

  if (!errors.empty()) throw ValidationError(std::move(errors));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace hfl
