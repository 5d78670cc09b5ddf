#include "dmc/model_io.hpp"

#include "dmc/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace dmc {
namespace {

using nlohmann::json;

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw parse_error(where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw parse_error(where + ": missing \"" + key + "\"");
  return *it;
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw parse_error(where + ": expected a string");
  return v.get<std::string>();
}

exact_prob as_prob(const json& v, const std::string& where) {
  try {
    if (v.is_string()) return exact_prob::parse(v.get_ref<const std::string&>());
    if (v.is_number()) return exact_prob::parse(v.dump());
  } catch (const parse_error& e) {
    throw parse_error(where + ": " + e.what());
  }
  throw parse_error(where + ": probability must be a string or number");
}

class reader {
 public:
  explicit reader(const json& doc) : doc_(doc) {}

  model run() {
    if (!doc_.is_object()) throw parse_error("model: top level must be an object");
    if (const auto it = doc_.find("format_version"); it != doc_.end()) {
      if (!it->is_number_integer() || it->get<int>() != model_format_version)
        throw parse_error("model: unsupported format_version");
    }
    read_agents();
    read_actions();
    read_valuations();
    if (const auto it = doc_.find("metadata"); it != doc_.end()) {
      if (!it->is_object()) throw parse_error("metadata: expected an object");
      for (const auto& [k, v] : it->items()) b_.set_metadata(k, v.dump());
    }
    return std::move(b_).build();
  }

 private:
  void read_agents() {
    const auto& agents = member(doc_, "agents", "model");
    if (!agents.is_array() || agents.empty()) throw parse_error("agents: expected a nonempty array");
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const auto where = "agents[" + std::to_string(i) + "]";
      const auto& a = agents[i];
      auto name = as_string(member(a, "name", where), where + ".name");
      const auto& st = member(a, "states", where);
      if (!st.is_array()) throw parse_error(where + ".states: expected an array");
      std::vector<std::string> states;
      for (const auto& s : st) states.push_back(as_string(s, where + ".states"));
      auto initial = as_string(member(a, "initial", where), where + ".initial");
      b_.add_agent(std::move(name), std::move(states), std::move(initial));
    }
  }

  // Resolves a tuple written in the action's declared loc order and
  // permutes it into sorted-loc order.
  std::vector<local_index> tuple(const json& t, const std::vector<agent_id>& declared_loc,
                                 const std::vector<std::size_t>& slot, const std::string& where) {
    std::vector<std::string> names;
    if (t.is_string()) names.push_back(t.get<std::string>());
    else if (t.is_array())
      for (const auto& e : t) names.push_back(as_string(e, where));
    else throw parse_error(where + ": expected a tuple of state names");
    if (names.size() != declared_loc.size())
      throw parse_error(where + ": tuple has " + std::to_string(names.size()) + " entries, loc has " +
                        std::to_string(declared_loc.size()));
    std::vector<local_index> out(names.size());
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto ref = b_.find_state(names[k]);
      if (!ref) throw parse_error(where + ": unknown state '" + names[k] + "'");
      if (ref->agent != declared_loc[k])
        throw parse_error(where + ": state '" + names[k] + "' does not belong to agent " +
                          b_.agent(declared_loc[k]).name);
      out[slot[k]] = ref->local;
    }
    return out;
  }

  void read_actions() {
    const auto& actions = member(doc_, "actions", "model");
    if (!actions.is_array()) throw parse_error("actions: expected an array");
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const auto& a = actions[i];
      auto where = "actions[" + std::to_string(i) + "]";
      auto name = as_string(member(a, "name", where), where + ".name");
      where = "action " + name;
      const auto& loc_json = member(a, "loc", where);
      if (!loc_json.is_array()) throw parse_error(where + ".loc: expected an array");
      std::vector<agent_id> declared_loc;
      for (const auto& l : loc_json) {
        const auto agent = b_.find_agent(as_string(l, where + ".loc"));
        if (!agent) throw parse_error(where + ".loc: unknown agent '" + l.get<std::string>() + "'");
        declared_loc.push_back(*agent);
      }
      const auto id = b_.add_action(name, declared_loc);
      const auto sorted = b_.action(id).loc();
      std::vector<std::size_t> slot(declared_loc.size());
      for (std::size_t k = 0; k < declared_loc.size(); ++k)
        slot[k] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), declared_loc[k]) - sorted.begin());

      if (const auto it = a.find("enabled"); it != a.end()) {
        if (!it->is_array()) throw parse_error(where + ".enabled: expected an array");
        for (const auto& t : *it) b_.declare_enabled(id, tuple(t, declared_loc, slot, where + ".enabled"));
      }
      if (const auto it = a.find("distribution"); it != a.end()) {
        if (!it->is_array()) throw parse_error(where + ".distribution: expected an array");
        for (std::size_t r = 0; r < it->size(); ++r) {
          const auto& row = (*it)[r];
          const auto rwhere = where + ".distribution[" + std::to_string(r) + "]";
          const auto source = tuple(member(row, "from", rwhere), declared_loc, slot, rwhere + ".from");
          const auto& to = member(row, "to", rwhere);
          if (!to.is_array()) throw parse_error(rwhere + ".to: expected an array");
          std::vector<outcome_spec> outs;
          for (const auto& o : to) {
            if (!o.is_array() || o.size() < 2 || o.size() > 3)
              throw parse_error(rwhere + ".to: each outcome is [target, probability] or [target, probability, label]");
            outcome_spec spec;
            spec.target = tuple(o[0], declared_loc, slot, rwhere + ".to");
            spec.prob = as_prob(o[1], rwhere + ".to");
            if (o.size() == 3) spec.label = as_string(o[2], rwhere + ".to label");
            outs.push_back(std::move(spec));
          }
          b_.add_row(id, source, outs, false);
        }
      }
    }
  }

  void read_valuations() {
    const auto it = doc_.find("valuations");
    if (it == doc_.end()) return;
    if (!it->is_object()) throw parse_error("valuations: expected an object keyed by state name");
    for (const auto& [state, aps] : it->items()) {
      const auto ref = b_.find_state(state);
      if (!ref) throw parse_error("valuations: unknown state '" + state + "'");
      if (!aps.is_array()) throw parse_error("valuations." + state + ": expected an array");
      for (const auto& ap : aps) b_.add_valuation(ref->agent, ref->local, as_string(ap, "valuations." + state));
    }
  }

  const json& doc_;
  model_builder b_;
};

std::string json_quote(std::string_view s) { return json(std::string(s)).dump(); }

void write_tuple(std::string& out, const model& m, const action_def& def, std::span<const local_index> t) {
  out += '[';
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k) out += ',';
    out += json_quote(m.state_name(def.loc()[k], t[k]));
  }
  out += ']';
}

}  // namespace

model parse_model(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw parse_error(std::string("model JSON: ") + e.what(), e.byte);
  }
  return reader(doc).run();
}

model load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

std::string serialize_model(const model& m) {
  std::string out;
  out += "{\n\"format_version\": " + std::to_string(model_format_version) + ",\n\"agents\": [\n";
  for (std::size_t i = 0; i < m.agent_count(); ++i) {
    const auto& a = m.agents()[i];
    out += "  {\"name\": " + json_quote(a.name) + ", \"states\": [";
    for (std::size_t s = 0; s < a.states.size(); ++s) out += (s ? "," : "") + json_quote(a.states[s]);
    out += "], \"initial\": " + json_quote(a.declared_initial) + "}";
    out += i + 1 < m.agent_count() ? ",\n" : "\n";
  }
  out += "],\n\"actions\": [\n";
  for (std::size_t ai = 0; ai < m.action_count(); ++ai) {
    const auto& def = m.actions()[ai];
    out += "  {\"name\": " + json_quote(def.name()) + ", \"loc\": [";
    for (std::size_t k = 0; k < def.arity(); ++k) out += (k ? "," : "") + json_quote(m.agent(def.loc()[k]).name);
    out += "],\n   \"enabled\": [";
    bool first = true;
    for (std::size_t r = 0; r < def.row_count(); ++r) {
      if (!def.row_declared_enabled(r)) continue;
      if (!first) out += ',';
      first = false;
      write_tuple(out, m, def, def.source(r));
    }
    for (const auto& t : def.enabled_without_row()) {
      if (!first) out += ',';
      first = false;
      write_tuple(out, m, def, t);
    }
    out += "],\n   \"distribution\": [";
    for (std::size_t r = 0; r < def.row_count(); ++r) {
      out += r ? ",\n    " : "\n    ";
      out += "{\"from\": ";
      write_tuple(out, m, def, def.source(r));
      out += ", \"to\": [";
      for (auto o = def.outcomes_begin(r); o < def.outcomes_end(r); ++o) {
        if (o != def.outcomes_begin(r)) out += ", ";
        out += '[';
        write_tuple(out, m, def, def.target(o));
        out += ", " + json_quote(def.exact(o).str());
        if (const auto label = def.label(o); !label.empty()) out += ", " + json_quote(label);
        out += ']';
      }
      out += "]}";
    }
    out += def.row_count() ? "\n   ]}" : "]}";
    out += ai + 1 < m.action_count() ? ",\n" : "\n";
  }
  out += "],\n\"valuations\": {";
  bool first = true;
  for (std::size_t i = 0; i < m.agent_count(); ++i) {
    const auto a = static_cast<agent_id>(i);
    for (local_index s = 0; s < m.agents()[i].states.size(); ++s) {
      const auto labels = m.declared_valuation(a, s);
      if (labels.empty()) continue;
      out += first ? "\n  " : ",\n  ";
      first = false;
      out += json_quote(m.state_name(a, s)) + ": [";
      for (std::size_t k = 0; k < labels.size(); ++k) out += (k ? "," : "") + json_quote(labels[k]);
      out += ']';
    }
  }
  out += first ? "}" : "\n}";
  if (!m.metadata().empty()) {
    out += ",\n\"metadata\": {";
    bool mfirst = true;
    for (const auto& [k, v] : m.metadata()) {
      out += mfirst ? "\n  " : ",\n  ";
      mfirst = false;
      out += json_quote(k) + ": " + v;
    }
    out += "\n}";
  }
  out += "\n}\n";
  return out;
}

void save_model(const model& m, const std::filesystem::path& path) { write_text_file(path, serialize_model(m)); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw io_error("error reading '" + path.string() + "'");
  return std::move(ss).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw io_error("error writing '" + path.string() + "'");
}

}  // namespace dmc
