#include "fot/io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fot {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string() + ": write failed");
}

namespace {

json parse_document(const std::string& document) {
  try {
    return json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError("$", std::string("malformed JSON: ") + e.what());
  }
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path, "expected a string");
  return j.get<std::string>();
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(path, "expected a finite number");
  return v;
}

double positive(const json& obj, const std::string& key, const std::string& path) {
  const std::string p = join(path, key);
  const double v = as_number(field(obj, key, path), p);
  if (!(v > 0.0)) throw ParseError(p, key + " must be strictly positive");
  return v;
}

const json& array_field(const json& obj, const std::string& key, const std::string& path) {
  const json& a = field(obj, key, path);
  if (!a.is_array()) throw ParseError(join(path, key), "expected an array");
  return a;
}

std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

Instance instance_from_json(const json& doc, const std::string& path) {
  std::vector<std::string> nodes;
  std::set<std::string> node_set;
  const json& jn = array_field(doc, "nodes", path);
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string p = indexed(join(path, "nodes"), i);
    std::string name = as_string(jn[i], p);
    if (!node_set.insert(name).second) throw ParseError(p, "duplicate node id '" + name + "'");
    nodes.push_back(std::move(name));
  }
  auto node_ref = [&](const json& obj, const std::string& key, const std::string& p) {
    std::string name = as_string(field(obj, key, p), join(p, key));
    if (!node_set.count(name)) throw ParseError(join(p, key), "unknown node '" + name + "'");
    return name;
  };

  std::vector<ArcSpec> arcs;
  std::set<std::string> arc_ids;
  const json& ja = array_field(doc, "arcs", path);
  for (std::size_t i = 0; i < ja.size(); ++i) {
    const std::string p = indexed(join(path, "arcs"), i);
    ArcSpec spec;
    spec.id = as_string(field(ja[i], "id", p), join(p, "id"));
    if (!arc_ids.insert(spec.id).second) {
      throw ParseError(join(p, "id"), "duplicate arc id '" + spec.id + "'");
    }
    spec.from = node_ref(ja[i], "from", p);
    spec.to = node_ref(ja[i], "to", p);
    spec.tau = positive(ja[i], "tau", p);
    spec.nu = positive(ja[i], "nu", p);
    arcs.push_back(std::move(spec));
  }
  const std::string source = node_ref(doc, "source", path);
  const std::string sink = node_ref(doc, "sink", path);
  const double u0 = positive(doc, "u0", path);
  try {
    return Instance(std::move(nodes), std::move(arcs), source, sink, u0);
  } catch (const ParseError&) {
    throw;
  } catch (const InstanceError& e) {
    throw ParseError(path.empty() ? "$" : path, e.what());
  }
}

json instance_to_json(const Instance& inst) {
  json doc;
  doc["nodes"] = inst.node_names();
  doc["arcs"] = json::array();
  for (const Arc& a : inst.arcs()) {
    doc["arcs"].push_back({{"id", a.id},
                           {"from", inst.node_name(a.tail)},
                           {"to", inst.node_name(a.head)},
                           {"tau", a.tau},
                           {"nu", a.nu}});
  }
  doc["source"] = inst.node_name(inst.source());
  doc["sink"] = inst.node_name(inst.sink());
  doc["u0"] = inst.inflow_rate();
  return doc;
}

json labels_to_json(const Instance& inst, const LabelVector& l) {
  json obj = json::object();
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) obj[inst.node_name(v)] = l[v];
  return obj;
}

ArcSet arc_set(const Instance& inst, const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array of arc ids");
  ArcSet set(inst.num_arcs());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = indexed(path, i);
    const std::string id = as_string(j[i], p);
    auto e = inst.find_arc(id);
    if (!e) throw ParseError(p, "unknown arc '" + id + "'");
    set.insert(*e);
  }
  return set;
}

std::vector<std::size_t> arc_path(const Instance& inst, const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array of arc ids");
  std::vector<std::size_t> arcs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = indexed(path, i);
    const std::string id = as_string(j[i], p);
    auto e = inst.find_arc(id);
    if (!e) throw ParseError(p, "unknown arc '" + id + "'");
    arcs.push_back(*e);
  }
  return arcs;
}

json arc_ids(const Instance& inst, const std::vector<std::size_t>& arcs) {
  json a = json::array();
  for (std::size_t e : arcs) a.push_back(inst.arc(e).id);
  return a;
}

}  // namespace

Instance parse_instance(const std::string& document) {
  return instance_from_json(parse_document(document), "");
}

Instance load_instance(const std::filesystem::path& path) {
  return parse_instance(read_text_file(path));
}

std::string serialize_instance(const Instance& inst) { return instance_to_json(inst).dump(2); }

std::string thin_flow_to_json(const Instance& inst, const ThinFlow& tf) {
  json doc;
  doc["lambda"] = labels_to_json(inst, tf.lambda);
  doc["x"] = json::object();
  for (std::size_t e = 0; e < inst.num_arcs(); ++e) doc["x"][inst.arc(e).id] = tf.x[e];
  return doc.dump(2);
}

ThinFlowRequest parse_thin_flow_request(const std::string& document,
                                        const std::filesystem::path& base_dir) {
  const json doc = parse_document(document);
  const json& ji = field(doc, "instance", "");
  std::optional<Instance> inst;
  if (ji.is_string()) {
    inst = load_instance(base_dir / ji.get<std::string>());
  } else {
    inst = instance_from_json(ji, "instance");
  }
  Configuration cfg{arc_set(*inst, field(doc, "active", ""), "active"),
                    arc_set(*inst, field(doc, "resetting", ""), "resetting")};
  GeneralizedSubnetwork sub = GeneralizedSubnetwork::full(*inst);
  if (doc.contains("allowed")) sub.allowed = arc_set(*inst, doc["allowed"], "allowed");
  if (doc.contains("forced_queue")) {
    sub.forced_queue = arc_set(*inst, doc["forced_queue"], "forced_queue");
  }
  return ThinFlowRequest{std::move(*inst), std::move(cfg), std::move(sub)};
}

std::string trajectory_to_json(const Trajectory& traj) {
  const Instance& inst = traj.instance();
  json phases = json::array();
  for (const Phase& ph : traj.phases()) {
    json p;
    p["theta_start"] = ph.theta_start;
    p["theta_end"] = ph.infinite() ? json(nullptr) : json(ph.theta_end);
    p["label_start"] = labels_to_json(inst, ph.label_start);
    p["direction"] = labels_to_json(inst, ph.direction);
    p["active"] = ph.config.active.ids(inst);
    p["resetting"] = ph.config.resetting.ids(inst);
    if (ph.joint_reclassification) p["joint_reclassification"] = true;
    phases.push_back(std::move(p));
  }
  json doc;
  doc["phases"] = std::move(phases);
  return doc.dump(2);
}

std::string profile_to_json(const Instance& inst, const StrategyProfile& profile) {
  json classes = json::array();
  for (const auto& c : profile) {
    json jc;
    jc["path"] = arc_ids(inst, c.path);
    if (const auto* a = std::get_if<EntryAtom>(&c.entry)) {
      jc["entry"] = {{"atom", a->time}, {"mass", a->mass}};
    } else {
      const auto& iv = std::get<EntryInterval>(c.entry);
      jc["entry"] = {{"start", iv.start}, {"end", iv.end}, {"rate", iv.rate}};
    }
    jc["waiting"] = json::array();
    for (const auto& w : c.waiting) jc["waiting"].push_back({{"offset", w.offset}, {"slope", w.slope}});
    if (!c.label.empty()) jc["label"] = c.label;
    classes.push_back(std::move(jc));
  }
  json doc;
  doc["classes"] = std::move(classes);
  return doc.dump(2);
}

StrategyProfile parse_profile(const Instance& inst, const std::string& document) {
  const json doc = parse_document(document);
  const json& jc = array_field(doc, "classes", "");
  StrategyProfile profile;
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string p = indexed("classes", i);
    StrategyClass c;
    c.path = arc_path(inst, field(jc[i], "path", p), join(p, "path"));
    const json& je = field(jc[i], "entry", p);
    const std::string pe = join(p, "entry");
    if (je.contains("atom")) {
      c.entry = EntryAtom{as_number(je["atom"], join(pe, "atom")), positive(je, "mass", pe)};
    } else {
      const double start = as_number(field(je, "start", pe), join(pe, "start"));
      const double end = as_number(field(je, "end", pe), join(pe, "end"));
      if (!(end > start)) throw ParseError(join(pe, "end"), "interval must have end > start");
      c.entry = EntryInterval{start, end, positive(je, "rate", pe)};
    }
    if (jc[i].contains("waiting")) {
      const json& jw = array_field(jc[i], "waiting", p);
      for (std::size_t k = 0; k < jw.size(); ++k) {
        const std::string pw = indexed(join(p, "waiting"), k);
        c.waiting.push_back({as_number(field(jw[k], "offset", pw), join(pw, "offset")),
                             as_number(field(jw[k], "slope", pw), join(pw, "slope"))});
      }
    } else {
      c.waiting.assign(c.path.size() + 1, AffineWait{});
    }
    if (jc[i].contains("label")) c.label = as_string(jc[i]["label"], join(p, "label"));
    try {
      validate_class(inst, c);
    } catch (const InstanceError& e) {
      throw ParseError(p, e.what());
    }
    profile.push_back(std::move(c));
  }
  return profile;
}

std::string packet_profile_to_json(const Instance& inst, const PacketProfile& prof) {
  json paths = json::object();
  for (std::size_t k = 0; k < prof.paths.size(); ++k) {
    paths[std::to_string(k + 1)] = arc_ids(inst, prof.paths[k]);
  }
  json doc;
  doc["paths"] = std::move(paths);
  return doc.dump(2);
}

PacketProfile parse_packet_profile(const Instance& inst, const std::string& document) {
  const json doc = parse_document(document);
  const json& jp = field(doc, "paths", "");
  if (!jp.is_object()) throw ParseError("paths", "expected an object keyed by packet index");
  PacketProfile prof;
  prof.paths.resize(jp.size());
  std::vector<bool> seen(jp.size(), false);
  for (auto it = jp.begin(); it != jp.end(); ++it) {
    const std::string p = "paths." + it.key();
    std::size_t k = 0;
    try {
      std::size_t used = 0;
      k = std::stoul(it.key(), &used);
      if (used != it.key().size()) k = 0;
    } catch (const std::exception&) {
      k = 0;
    }
    if (k < 1 || k > jp.size() || seen[k - 1]) {
      throw ParseError(p, "packet indices must be 1..n without gaps");
    }
    seen[k - 1] = true;
    prof.paths[k - 1] = arc_path(inst, it.value(), p);
  }
  return prof;
}

std::string outcome_csv(const Outcome& out) {
  const Instance& inst = out.instance();
  std::ostringstream csv;
  csv.precision(17);
  csv << "arc,time,F_in,F_out,z\n";
  for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
    const auto f_in = out.inflow(e);
    const auto f_out = out.outflow(e);
    auto xs = f_in.breakpoints();
    for (double x : f_out.breakpoints()) xs.push_back(x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double x : xs) {
      csv << inst.arc(e).id << ',' << x << ',' << f_in(x) << ',' << f_out(x) << ','
          << out.queue(e, x) << '\n';
    }
  }
  return csv.str();
}

std::string packet_outcome_csv(const Instance& inst, const PacketOutcome& out) {
  std::ostringstream csv;
  csv.precision(17);
  csv << "packet,arc,entry,proc_start,proc_end,tail_arrival\n";
  for (std::size_t k = 0; k < out.packets.size(); ++k) {
    for (const auto& h : out.packets[k].hops) {
      csv << k + 1 << ',' << inst.arc(h.arc).id << ',' << h.entry << ',' << h.proc_start
          << ',' << h.proc_end << ',' << h.tail_arrival << '\n';
    }
  }
  return csv.str();
}

}  // namespace fot
