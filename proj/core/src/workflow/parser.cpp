// SPDX-License-Identifier: Apache-2.0
#include "flowrt/workflow/parser.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "flowrt/common/error.hpp"
#include "flowrt/common/units.hpp"
#include "flowrt/workflow/validate.hpp"

namespace flowrt {

namespace {

class LineParser {
 public:
  explicit LineParser(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(Errc::kSyntax, "line " + std::to_string(line_) + ": " + msg);
  }

  std::string ident(std::string_view s) const {
    s = trim(s);
    if (s.empty()) fail("expected an identifier");
    for (char c : s) {
      bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
      if (!ok) fail("invalid identifier '" + std::string(s) + "'");
    }
    return std::string(s);
  }

  std::string_view bracketed(std::string_view s, char open, char close) const {
    s = trim(s);
    if (s.size() < 2 || s.front() != open || s.back() != close)
      fail(std::string("expected ") + open + "..." + close);
    return trim(s.substr(1, s.size() - 2));
  }

  std::vector<std::string_view> split(std::string_view s, char sep) const {
    std::vector<std::string_view> out;
    if (trim(s).empty()) return out;
    std::size_t start = 0;
    while (true) {
      auto pos = s.find(sep, start);
      out.push_back(trim(s.substr(start, pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return out;
  }

  std::vector<std::string> ident_list(std::string_view s) const {
    std::vector<std::string> out;
    for (auto item : split(bracketed(s, '[', ']'), ',')) out.push_back(ident(item));
    return out;
  }

  double number(std::string_view s) const {
    s = trim(s);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail("expected a number, got '" + std::string(s) + "'");
    return v;
  }

  ComputeModel compute(std::string_view s) const {
    ComputeModel m;
    std::istringstream in{std::string(s)};
    std::string tok;
    bool first = true;
    while (in >> tok) {
      if (first) {
        first = false;
        std::string_view name = tok;
        std::string_view arg;
        if (auto p = name.find('('); p != std::string_view::npos) {
          if (name.back() != ')') fail("unterminated transform argument");
          arg = name.substr(p + 1, name.size() - p - 2);
          name = name.substr(0, p);
        }
        auto kind = transform_from_string(name);
        if (!kind) fail("unknown transform '" + std::string(name) + "'");
        m.transform = *kind;
        if (m.transform == TransformKind::kMix) {
          auto size = parse_size(arg);
          if (!size) fail("mix needs a size argument, e.g. mix(64KiB)");
          m.mix_bytes = *size;
        } else if (!arg.empty()) {
          fail("transform '" + std::string(name) + "' takes no argument");
        }
        continue;
      }
      auto eq = tok.find('=');
      if (eq == std::string::npos) fail("expected key=value, got '" + tok + "'");
      auto key = std::string_view(tok).substr(0, eq);
      double v = number(std::string_view(tok).substr(eq + 1));
      if (key == "cost") m.cost_ms_per_mib = v;
      else if (key == "base") m.base_cpu_ms = v;
      else if (key == "emit") m.emit_fraction = v;
      else fail("unknown compute key '" + std::string(key) + "'");
    }
    if (first) fail("empty compute model");
    if (m.cost_ms_per_mib < 0 || m.base_cpu_ms < 0) fail("negative compute cost");
    if (m.emit_fraction < 0 || m.emit_fraction > 1) fail("emit must be within [0, 1]");
    return m;
  }

  std::vector<FlowEdge> outputs(const FunctionName& source, std::string_view s) const {
    std::vector<FlowEdge> edges;
    for (auto item : split(bracketed(s, '[', ']'), ';')) {
      auto arrow = item.find("->");
      if (arrow == std::string_view::npos) fail("expected '<data> -> <dest>'");
      FlowEdge e;
      e.source = source;
      e.data_name = ident(item.substr(0, arrow));
      for (auto d : split(item.substr(arrow + 2), ',')) e.destinations.push_back(ident(d));
      edges.push_back(std::move(e));
    }
    return edges;
  }

  std::pair<FlowEdge, SwitchSelector> switch_edge(const FunctionName& source,
                                                  std::string_view s) const {
    auto arrow = s.find("->");
    if (arrow == std::string_view::npos) fail("expected '<data> -> {label: dest}'");
    FlowEdge e;
    e.source = source;
    e.conditional = true;
    e.data_name = ident(s.substr(0, arrow));
    auto rest = trim(s.substr(arrow + 2));
    auto close = rest.find('}');
    if (close == std::string_view::npos) fail("unterminated switch map");
    auto body = bracketed(rest.substr(0, close + 1), '{', '}');
    for (auto item : split(body, ',')) {
      auto colon = item.find(':');
      if (colon == std::string_view::npos) fail("expected '<label>: <dest>'");
      e.labels.push_back(ident(item.substr(0, colon)));
      e.destinations.push_back(ident(item.substr(colon + 1)));
    }
    SwitchSelector sel;
    auto tail = trim(rest.substr(close + 1));
    if (!tail.empty()) {
      if (tail.substr(0, 2) != "by") fail("expected 'by <selector>'");
      auto name = trim(tail.substr(2));
      if (name == "hash") {
        sel.kind = SwitchSelector::Kind::kHash;
      } else if (name.substr(0, 6) == "const:") {
        sel.kind = SwitchSelector::Kind::kConst;
        sel.label = ident(name.substr(6));
      } else {
        fail("unknown selector '" + std::string(name) + "'");
      }
    }
    return {std::move(e), sel};
  }

 private:
  std::size_t line_;
};

}  // namespace

WorkflowDefinition parse_workflow(std::string_view text) {
  WorkflowDefinition def;
  bool saw_header = false;
  bool saw_entry = false;
  bool saw_terminals = false;
  FunctionSpec* current = nullptr;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto line = trim(raw);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    LineParser p(line_no);

    if (line.substr(0, 9) == "function " ) {
      if (line.back() != ':') p.fail("function header must end with ':'");
      FunctionSpec fn;
      fn.name = p.ident(line.substr(9, line.size() - 10));
      def.functions.push_back(std::move(fn));
      current = &def.functions.back();
      continue;
    }

    auto colon = line.find(':');
    if (colon == std::string_view::npos) p.fail("expected '<key>: <value>'");
    auto key = trim(line.substr(0, colon));
    auto value = trim(line.substr(colon + 1));

    if (key == "workflow") {
      if (saw_header) p.fail("duplicate workflow header");
      def.name = p.ident(value);
      saw_header = true;
    } else if (key == "entry") {
      def.entry = p.ident(value);
      saw_entry = true;
      current = nullptr;
    } else if (key == "terminals") {
      def.terminals = p.ident_list(value);
      saw_terminals = true;
      current = nullptr;
    } else if (key == "memory_mb" || key == "compute" || key == "inputs" ||
               key == "outputs" || key == "switch") {
      if (!current) p.fail("'" + std::string(key) + "' outside a function block");
      if (key == "memory_mb") {
        double mb = p.number(value);
        if (mb != static_cast<double>(static_cast<std::int64_t>(mb)))
          p.fail("memory_mb must be an integer");
        current->memory_mb = static_cast<std::int64_t>(mb);
      } else if (key == "compute") {
        current->compute = p.compute(value);
      } else if (key == "inputs") {
        current->declared_inputs = p.ident_list(value);
      } else if (key == "outputs") {
        for (auto& e : p.outputs(current->name, value)) def.flows.push_back(std::move(e));
      } else {
        auto [edge, selector] = p.switch_edge(current->name, value);
        if (current->switch_selector) p.fail("only one switch per function");
        current->switch_selector = selector;
        def.flows.push_back(std::move(edge));
      }
    } else {
      p.fail("unknown key '" + std::string(key) + "'");
    }
    if (end == text.size()) break;
  }

  if (!saw_header) throw Error(Errc::kSyntax, "missing 'workflow:' header");
  if (!saw_entry) throw Error(Errc::kSyntax, "missing 'entry:'");
  if (!saw_terminals) throw Error(Errc::kSyntax, "missing 'terminals:'");

  auto report = validate(def);
  for (const auto& f : report.findings) {
    if (is_structural(f.kind))
      throw Error(Errc::kSemantic, std::string(to_string(f.kind)) + " at '" +
                                       f.element + "': " + f.message);
  }
  return def;
}

WorkflowDefinition load_workflow_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kInvalidArgument, "cannot open workflow file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_workflow(ss.str());
}

std::string format_workflow(const WorkflowDefinition& def) {
  std::ostringstream out;
  out << "workflow: " << def.name << "\n";
  for (const auto& fn : def.functions) {
    out << "function " << fn.name << ":\n";
    out << "  memory_mb: " << fn.memory_mb << "\n";
    const auto& c = fn.compute;
    out << "  compute: " << to_string(c.transform);
    if (c.transform == TransformKind::kMix) out << "(" << c.mix_bytes << ")";
    out << " cost=" << format_double(c.cost_ms_per_mib)
        << " base=" << format_double(c.base_cpu_ms)
        << " emit=" << format_double(c.emit_fraction) << "\n";
    out << "  inputs: [";
    for (std::size_t i = 0; i < fn.declared_inputs.size(); ++i)
      out << (i ? ", " : "") << fn.declared_inputs[i];
    out << "]\n";
    for (const auto* e : def.outgoing(fn.name)) {
      if (e->conditional) {
        out << "  switch: " << e->data_name << " -> {";
        for (std::size_t i = 0; i < e->destinations.size(); ++i)
          out << (i ? ", " : "") << e->labels[i] << ": " << e->destinations[i];
        out << "}";
        if (fn.switch_selector) {
          if (fn.switch_selector->kind == SwitchSelector::Kind::kHash) out << " by hash";
          else out << " by const:" << fn.switch_selector->label;
        }
        out << "\n";
      } else {
        out << "  outputs: [" << e->data_name << " ->";
        for (std::size_t i = 0; i < e->destinations.size(); ++i)
          out << (i ? ", " : " ") << e->destinations[i];
        out << "]\n";
      }
    }
  }
  out << "entry: " << def.entry << "\n";
  out << "terminals: [";
  for (std::size_t i = 0; i < def.terminals.size(); ++i)
    out << (i ? ", " : "") << def.terminals[i];
  out << "]\n";
  return out.str();
}

}  // namespace flowrt
