#include "aprl/script.hpp"

#include <cctype>
#include <charconv>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace aprl {

namespace {

// Cursor over one line, tracking the column for diagnostics.
class LineCursor {
 public:
  LineCursor(const std::string& file, int line_no, std::string_view text)
      : file_(file), line_(line_no), text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size() || text_[pos_] == '#';
  }

  int column() const { return static_cast<int>(pos_) + 1; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(file_, line_, column(), msg);
  }

  // word = [A-Za-z_][A-Za-z0-9_]*
  std::string word(const char* what) {
    skip_ws();
    if (pos_ >= text_.size() || !(std::isalpha(text_[pos_]) || text_[pos_] == '_'))
      fail(std::string("expected ") + what);
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(text_[pos_]) || text_[pos_] == '_')) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  double number(const char* what) {
    skip_ws();
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr == begin) fail(std::string("expected ") + what);
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  bool try_literal(std::string_view lit) {
    skip_ws();
    if (text_.substr(pos_, lit.size()) == lit) {
      pos_ += lit.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view lit) {
    if (!try_literal(lit)) fail("expected '" + std::string(lit) + "'");
  }

  Vec3 point() {
    expect("(");
    Vec3 p;
    p.x = number("x coordinate");
    expect(",");
    p.y = number("y coordinate");
    expect(",");
    p.z = number("z coordinate");
    expect(")");
    if (!p.finite()) fail("non-finite point");
    return p;
  }

  TargetRef target() {
    skip_ws();
    if (try_literal("$selected")) return TargetRef{TargetRef::Kind::Selected, {}};
    if (pos_ < text_.size() && text_[pos_] == '(')
      return TargetRef{TargetRef::Kind::Literal, point()};
    fail("expected a target ($selected or a literal point)");
  }

  void expect_end() {
    if (!at_end()) fail("unexpected trailing text");
  }

 private:
  const std::string& file_;
  int line_;
  std::string_view text_;
  std::size_t pos_ = 0;
};

void parse_points_line(LineCursor& cur, ObjectiveScript& script) {
  const std::string name = cur.word("point set name");
  if (script.point_sets.contains(name)) cur.fail("duplicate point set '" + name + "'");
  cur.expect("=");
  cur.expect("[");
  std::vector<Vec3>& points = script.point_sets[name];
  if (!cur.try_literal("]")) {
    for (;;) {
      points.push_back(cur.point());
      if (cur.try_literal("]")) break;
      cur.expect(",");
    }
  }
  if (points.empty()) cur.fail("point set '" + name + "' is empty");
  cur.expect_end();
}

void parse_node_line(LineCursor& cur, ObjectiveScript& script, int line, int column) {
  ScriptNode node;
  node.line = line;
  node.column = column;
  node.id = cur.word("node id");
  if (script.node_index.contains(node.id)) cur.fail("duplicate node '" + node.id + "'");
  cur.expect(":");
  const std::string kind = cur.word("node kind");
  if (kind == "timer") {
    TimerNode body;
    body.min_s = cur.number("timer minimum");
    body.max_s = cur.number("timer maximum");
    if (body.min_s <= 0.0) cur.fail("timer minimum must be positive");
    if (body.min_s > body.max_s) cur.fail("timer minimum exceeds maximum");
    node.body = body;
  } else if (kind == "select_random") {
    node.body = SelectRandomNode{cur.word("point set name")};
  } else if (kind == "defend") {
    DefendNode body;
    body.target = cur.target();
    cur.expect("radius");
    body.radius_m = cur.number("radius");
    if (body.radius_m <= 0.0) cur.fail("defend radius must be positive");
    node.body = body;
  } else if (kind == "move") {
    node.body = MoveNode{cur.target()};
  } else if (kind == "navigate_volume") {
    const std::string mode = cur.word("volume mode");
    if (mode == "helicopter") {
      node.body = NavigateVolumeNode{ControlMode::Helicopter};
    } else if (mode == "zerog") {
      node.body = NavigateVolumeNode{ControlMode::ZeroG};
    } else {
      cur.fail("unknown volume mode '" + mode + "' (helicopter|zerog)");
    }
  } else {
    cur.fail("unknown node kind '" + kind + "'");
  }
  cur.expect("->");
  node.next = cur.word("next node id");
  cur.expect_end();
  script.node_index.emplace(node.id, static_cast<int>(script.nodes.size()));
  script.nodes.push_back(std::move(node));
}

// Reachability and $selected binding checks over the parsed graph.
void validate_graph(const std::string& file, ObjectiveScript& script) {
  if (script.entry.empty())
    throw ParseError(file, 1, 1, "missing entry node");
  if (!script.node_index.contains(script.entry))
    throw ParseError(file, 1, 1, "entry references unknown node '" + script.entry + "'");

  for (const ScriptNode& node : script.nodes) {
    if (!script.node_index.contains(node.next))
      throw ParseError(file, node.line, node.column,
                       "node '" + node.id + "' links to unknown node '" + node.next + "'");
    if (const auto* sel = std::get_if<SelectRandomNode>(&node.body)) {
      if (!script.point_sets.contains(sel->set_name))
        throw ParseError(file, node.line, node.column,
                         "undefined point set '" + sel->set_name + "'");
    }
  }

  // reachability from the entry
  std::set<int> reachable;
  std::deque<int> frontier{script.index_of(script.entry)};
  while (!frontier.empty()) {
    const int idx = frontier.front();
    frontier.pop_front();
    if (!reachable.insert(idx).second) continue;
    frontier.push_back(script.index_of(script.node(idx).next));
  }
  for (std::size_t i = 0; i < script.nodes.size(); ++i) {
    if (!reachable.contains(static_cast<int>(i)))
      throw ParseError(file, script.nodes[i].line, script.nodes[i].column,
                       "node '" + script.nodes[i].id + "' is unreachable from the entry");
  }

  // nodes reachable without passing any select_random must not use $selected
  std::set<int> pre_selection;
  frontier.push_back(script.index_of(script.entry));
  while (!frontier.empty()) {
    const int idx = frontier.front();
    frontier.pop_front();
    if (!pre_selection.insert(idx).second) continue;
    if (std::holds_alternative<SelectRandomNode>(script.node(idx).body)) continue;
    frontier.push_back(script.index_of(script.node(idx).next));
  }
  for (int idx : pre_selection) {
    const ScriptNode& node = script.node(idx);
    const TargetRef* target = nullptr;
    if (const auto* defend = std::get_if<DefendNode>(&node.body)) target = &defend->target;
    if (const auto* move = std::get_if<MoveNode>(&node.body)) target = &move->target;
    if (target && target->kind == TargetRef::Kind::Selected &&
        !std::holds_alternative<SelectRandomNode>(node.body))
      throw ParseError(file, node.line, node.column,
                       "node '" + node.id + "' uses $selected before any select_random");
  }
}

}  // namespace

ObjectiveScript parse_script(const std::string& text, const std::string& source_name) {
  ObjectiveScript script;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  int entry_line = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    LineCursor cur(source_name, line_no, line);
    if (cur.at_end()) continue;
    const std::string keyword = cur.word("directive (points|node|entry)");
    if (keyword == "points") {
      parse_points_line(cur, script);
    } else if (keyword == "node") {
      parse_node_line(cur, script, line_no, cur.column());
    } else if (keyword == "entry") {
      if (!script.entry.empty())
        cur.fail("duplicate entry directive (first at line " +
                 std::to_string(entry_line) + ")");
      script.entry = cur.word("entry node id");
      entry_line = line_no;
      cur.expect_end();
    } else {
      cur.fail("unknown directive '" + keyword + "'");
    }
  }
  validate_graph(source_name, script);
  return script;
}

ObjectiveScript parse_script_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open script: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_script(buffer.str(), path);
}

namespace {

std::string format_number(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

std::string format_point(const Vec3& p) {
  return "(" + format_number(p.x) + ", " + format_number(p.y) + ", " +
         format_number(p.z) + ")";
}

std::string format_target(const TargetRef& t) {
  return t.kind == TargetRef::Kind::Selected ? "$selected" : format_point(t.literal);
}

}  // namespace

std::string serialize_script(const ObjectiveScript& script) {
  std::ostringstream out;
  for (const auto& [name, points] : script.point_sets) {
    out << "points " << name << " = [";
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i) out << ", ";
      out << format_point(points[i]);
    }
    out << "]\n";
  }
  out << "entry " << script.entry << "\n";
  for (const ScriptNode& node : script.nodes) {
    out << "node " << node.id << ": ";
    if (const auto* timer = std::get_if<TimerNode>(&node.body)) {
      out << "timer " << format_number(timer->min_s) << " " << format_number(timer->max_s);
    } else if (const auto* sel = std::get_if<SelectRandomNode>(&node.body)) {
      out << "select_random " << sel->set_name;
    } else if (const auto* defend = std::get_if<DefendNode>(&node.body)) {
      out << "defend " << format_target(defend->target) << " radius "
          << format_number(defend->radius_m);
    } else if (const auto* move = std::get_if<MoveNode>(&node.body)) {
      out << "move " << format_target(move->target);
    } else if (const auto* nav = std::get_if<NavigateVolumeNode>(&node.body)) {
      out << "navigate_volume "
          << (nav->mode == ControlMode::Helicopter ? "helicopter" : "zerog");
    }
    out << " -> " << node.next << "\n";
  }
  return out.str();
}

}  // namespace aprl
