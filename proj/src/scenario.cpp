#include "dobcoord/scenario.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <utility>

namespace dobcoord::scenario {

namespace {

// ---------------------------------------------------------------------------
// Tokenizer: '#' starts a comment; '{', '}', '[', ']', ',' are punctuation;
// everything else groups into atoms carrying their source location.
// ---------------------------------------------------------------------------

struct Token {
  enum class Kind { Atom, LBrace, RBrace, LBracket, RBracket, Comma, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }
  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_space_and_comments();
    current_.line = line_;
    current_.col = col_;
    if (pos_ >= text_.size()) {
      current_.kind = Token::Kind::End;
      current_.text.clear();
      return;
    }
    const char c = text_[pos_];
    switch (c) {
      case '{': current_.kind = Token::Kind::LBrace; break;
      case '}': current_.kind = Token::Kind::RBrace; break;
      case '[': current_.kind = Token::Kind::LBracket; break;
      case ']': current_.kind = Token::Kind::RBracket; break;
      case ',': current_.kind = Token::Kind::Comma; break;
      default: {
        current_.kind = Token::Kind::Atom;
        std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(
                   static_cast<unsigned char>(text_[pos_])) &&
               text_[pos_] != '{' && text_[pos_] != '}' &&
               text_[pos_] != '[' && text_[pos_] != ']' &&
               text_[pos_] != ',' && text_[pos_] != '#') {
          ++pos_;
          ++col_;
        }
        current_.text.assign(text_.substr(start, pos_ - start));
        return;
      }
    }
    current_.text.assign(1, c);
    ++pos_;
    ++col_;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == '\n') {
        ++pos_;
        ++line_;
        col_ = 1;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
        ++col_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token current_;
};

// ---------------------------------------------------------------------------
// Generic value tree.
// ---------------------------------------------------------------------------

struct Node;
using Item = std::pair<std::string, Node>;

struct Node {
  enum class Kind { Scalar, Word, Vector, Matrix, Block };
  Kind kind = Kind::Word;
  int line = 1;
  int col = 1;
  double scalar = 0.0;
  std::string text;  // raw atom text (exact integer round-trip for seeds)
  matops::Vector vector;
  matops::Matrix matrix;
  std::vector<Item> items;
};

[[noreturn]] void fail(const Token& at, const std::string& msg) {
  throw ParseError(msg, at.line, at.col);
}

[[noreturn]] void fail(const Node& at, const std::string& msg) {
  throw ParseError(msg, at.line, at.col);
}

double parse_number(const Token& tok) {
  const char* begin = tok.text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end != begin + tok.text.size())
    fail(tok, "expected a number, got '" + tok.text + "'");
  return value;
}

std::vector<double> parse_number_row(Lexer& lex) {
  // Caller consumed '['; reads numbers until ']'.
  std::vector<double> values;
  bool expect_value = true;
  for (;;) {
    const Token tok = lex.take();
    if (tok.kind == Token::Kind::RBracket) break;
    if (tok.kind == Token::Kind::Comma) {
      if (expect_value) fail(tok, "unexpected ','");
      expect_value = true;
      continue;
    }
    if (tok.kind != Token::Kind::Atom) fail(tok, "expected a number or ']'");
    values.push_back(parse_number(tok));
    expect_value = false;
  }
  return values;
}

Node parse_value(Lexer& lex);

Node parse_bracket_value(Lexer& lex, const Token& open) {
  Node node;
  node.line = open.line;
  node.col = open.col;
  if (lex.peek().kind == Token::Kind::LBracket) {
    // Matrix: a list of rows.
    std::vector<std::vector<double>> rows;
    bool expect_row = true;
    for (;;) {
      const Token tok = lex.take();
      if (tok.kind == Token::Kind::RBracket) break;
      if (tok.kind == Token::Kind::Comma) {
        if (expect_row) fail(tok, "unexpected ','");
        expect_row = true;
        continue;
      }
      if (tok.kind != Token::Kind::LBracket)
        fail(tok, "expected a matrix row '[...]'");
      rows.push_back(parse_number_row(lex));
      expect_row = false;
      if (rows.back().size() != rows.front().size())
        fail(tok, "matrix rows have unequal lengths");
    }
    node.kind = Node::Kind::Matrix;
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    const auto n_cols =
        rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
    node.matrix.resize(n_rows, n_cols);
    for (Eigen::Index i = 0; i < n_rows; ++i)
      for (Eigen::Index j = 0; j < n_cols; ++j)
        node.matrix(i, j) = rows[static_cast<std::size_t>(i)]
                                [static_cast<std::size_t>(j)];
    return node;
  }
  const std::vector<double> values = parse_number_row(lex);
  node.kind = Node::Kind::Vector;
  node.vector.resize(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    node.vector(static_cast<Eigen::Index>(i)) = values[i];
  return node;
}

std::vector<Item> parse_items(Lexer& lex, bool top_level);

Node parse_value(Lexer& lex) {
  const Token tok = lex.take();
  Node node;
  node.line = tok.line;
  node.col = tok.col;
  switch (tok.kind) {
    case Token::Kind::LBrace:
      node.kind = Node::Kind::Block;
      node.items = parse_items(lex, /*top_level=*/false);
      return node;
    case Token::Kind::LBracket:
      return parse_bracket_value(lex, tok);
    case Token::Kind::Atom: {
      node.text = tok.text;
      const char* begin = tok.text.c_str();
      char* end = nullptr;
      const double value = std::strtod(begin, &end);
      if (end == begin + tok.text.size()) {
        node.kind = Node::Kind::Scalar;
        node.scalar = value;
      } else {
        node.kind = Node::Kind::Word;
      }
      return node;
    }
    default:
      fail(tok, "expected a value");
  }
}

std::vector<Item> parse_items(Lexer& lex, bool top_level) {
  std::vector<Item> items;
  for (;;) {
    const Token tok = lex.take();
    if (tok.kind == Token::Kind::End) {
      if (!top_level) fail(tok, "unexpected end of input, '}' missing");
      return items;
    }
    if (tok.kind == Token::Kind::RBrace) {
      if (top_level) fail(tok, "unexpected '}'");
      return items;
    }
    if (tok.kind != Token::Kind::Atom)
      fail(tok, "expected a key, got '" + tok.text + "'");
    Node value = parse_value(lex);
    value.line = tok.line;
    value.col = tok.col;
    items.emplace_back(tok.text, std::move(value));
  }
}

// ---------------------------------------------------------------------------
// Binding: walk blocks with explicit key handling so unknown keys are
// rejected with their location.
// ---------------------------------------------------------------------------

const Node& expect_kind(const Node& node, Node::Kind kind, const char* what) {
  if (node.kind != kind) fail(node, std::string("expected ") + what);
  return node;
}

matops::Matrix as_matrix(const Node& node) {
  return expect_kind(node, Node::Kind::Matrix, "a matrix [[...], ...]").matrix;
}

matops::Vector as_vector(const Node& node) {
  return expect_kind(node, Node::Kind::Vector, "a vector [...]").vector;
}

double as_number(const Node& node) {
  return expect_kind(node, Node::Kind::Scalar, "a number").scalar;
}

bool as_bool(const Node& node) {
  if (node.kind == Node::Kind::Word && node.text == "true") return true;
  if (node.kind == Node::Kind::Word && node.text == "false") return false;
  fail(node, "expected true or false");
}

std::string as_word(const Node& node) {
  if (node.kind == Node::Kind::Word || node.kind == Node::Kind::Scalar)
    return node.text;
  fail(node, "expected a word");
}

/// One-pass block reader; every item must be claimed exactly once.
class BlockReader {
 public:
  BlockReader(const Node& block, std::string context)
      : block_(block), context_(std::move(context)) {
    claimed_.assign(block.items.size(), false);
  }

  const Node* find(const std::string& key) {
    const Node* found = nullptr;
    for (std::size_t i = 0; i < block_.items.size(); ++i) {
      if (block_.items[i].first != key) continue;
      if (found)
        fail(block_.items[i].second,
             "duplicate key '" + key + "' in " + context_);
      claimed_[i] = true;
      found = &block_.items[i].second;
    }
    return found;
  }

  const Node& require(const std::string& key) {
    const Node* node = find(key);
    if (!node)
      fail(block_, "missing required key '" + key + "' in " + context_);
    return *node;
  }

  std::vector<const Node*> all(const std::string& key) {
    std::vector<const Node*> out;
    for (std::size_t i = 0; i < block_.items.size(); ++i) {
      if (block_.items[i].first != key) continue;
      claimed_[i] = true;
      out.push_back(&block_.items[i].second);
    }
    return out;
  }

  void finish() {
    for (std::size_t i = 0; i < block_.items.size(); ++i)
      if (!claimed_[i])
        fail(block_.items[i].second, "unknown key '" + block_.items[i].first +
                                         "' in " + context_);
  }

 private:
  const Node& block_;
  std::string context_;
  std::vector<bool> claimed_;
};

struct AgentParse {
  model::AgentModel agent;
  model::DisturbanceExosystem disturbance;
};

AgentParse bind_agent(const Node& node, int index) {
  const std::string ctx = "agent " + std::to_string(index);
  BlockReader reader(expect_kind(node, Node::Kind::Block, "a block"), ctx);

  std::optional<matops::Matrix> S;
  matops::Vector d0;
  std::optional<Eigen::RowVectorXd> coupling;
  if (const Node* dist = reader.find("disturbance")) {
    BlockReader dr(expect_kind(*dist, Node::Kind::Block, "a block"),
                   ctx + " disturbance");
    S = as_matrix(dr.require("S"));
    if (S->rows() != S->cols()) fail(*dist, ctx + ": disturbance S must be square");
    d0 = as_vector(dr.require("initial"));
    if (d0.size() != S->rows())
      fail(*dist, ctx + ": disturbance initial length must match S");
    if (const Node* c = dr.find("coupling")) {
      const matops::Vector v = as_vector(*c);
      coupling = v.transpose();
      if (coupling->cols() != S->rows())
        fail(*c, ctx + ": coupling length must match S");
    }
    dr.finish();
  }
  const Eigen::Index q = S ? S->rows() : 0;

  try {
    if (const Node* mds = reader.find("mass_damper_spring")) {
      BlockReader mr(expect_kind(*mds, Node::Kind::Block, "a block"),
                     ctx + " mass_damper_spring");
      const double f = as_number(mr.require("f"));
      const double g = as_number(mr.require("g"));
      mr.finish();
      reader.finish();
      if (q > 0 && !coupling)
        fail(node, ctx + ": mass_damper_spring with a disturbance needs a "
                         "coupling row");
      Eigen::RowVectorXd row =
          coupling.value_or(Eigen::RowVectorXd::Zero(0));
      model::AgentModel agent = model::mass_damper_spring(f, g, row);
      return {std::move(agent),
              {S.value_or(matops::Matrix(0, 0)), d0}};
    }
    if (coupling)
      fail(node, ctx + ": coupling is only meaningful with "
                       "mass_damper_spring; give E explicitly");
    matops::Matrix a = as_matrix(reader.require("A"));
    matops::Matrix b = as_matrix(reader.require("B"));
    matops::Matrix c = as_matrix(reader.require("C"));
    matops::Matrix d = as_matrix(reader.require("D"));
    matops::Matrix e;
    if (const Node* en = reader.find("E")) {
      e = as_matrix(*en);
    } else {
      if (q > 0)
        fail(node, ctx + ": an explicit agent with a disturbance needs E");
      e = matops::Matrix(a.rows(), 0);
    }
    reader.finish();
    if (e.cols() != q)
      fail(node, ctx + ": E must have one column per disturbance state");
    model::AgentModel agent(std::move(a), std::move(b), std::move(c),
                            std::move(d), std::move(e));
    return {std::move(agent), {S.value_or(matops::Matrix(0, 0)), d0}};
  } catch (const DimensionError& e) {
    fail(node, ctx + ": " + e.what());
  }
}

model::LeaderExosystem bind_leader(const Node& node) {
  BlockReader reader(expect_kind(node, Node::Kind::Block, "a block"),
                     "leader");
  model::LeaderExosystem leader{as_matrix(reader.require("S0")),
                                as_matrix(reader.require("F0")),
                                as_vector(reader.require("initial"))};
  reader.finish();
  if (leader.S0.rows() != leader.S0.cols())
    fail(node, "leader: S0 must be square");
  if (leader.F0.cols() != leader.S0.rows())
    fail(node, "leader: F0 must have one column per S0 state");
  if (leader.initial.size() != leader.S0.rows())
    fail(node, "leader: initial length must match S0");
  return leader;
}

graph::CommGraph bind_graph(const Node& node, int index) {
  const std::string ctx = "graph " + std::to_string(index);
  BlockReader reader(expect_kind(node, Node::Kind::Block, "a block"), ctx);
  const double followers_raw = as_number(reader.require("followers"));
  const int followers = static_cast<int>(followers_raw);
  if (followers < 1 || followers != followers_raw)
    fail(node, ctx + ": followers must be a positive integer");
  std::vector<graph::Edge> edges;
  for (const Node* e : reader.all("edge")) {
    const matops::Vector v = as_vector(*e);
    if (v.size() != 2 && v.size() != 3)
      fail(*e, ctx + ": edge must be [from, to] or [from, to, weight]");
    graph::Edge edge;
    edge.from = static_cast<int>(v(0));
    edge.to = static_cast<int>(v(1));
    edge.weight = v.size() == 3 ? v(2) : 1.0;
    if (edge.from != v(0) || edge.to != v(1))
      fail(*e, ctx + ": edge endpoints must be integers");
    edges.push_back(edge);
  }
  reader.finish();
  try {
    return graph::CommGraph(followers, edges);
  } catch (const Error& err) {
    fail(node, ctx + ": " + err.what());
  }
}

graph::SwitchingSchedule bind_schedule(const Node& node,
                                       std::vector<graph::CommGraph> graphs) {
  BlockReader reader(expect_kind(node, Node::Kind::Block, "a block"),
                     "schedule");
  const double dwell = as_number(reader.require("dwell_time"));
  bool periodic = false;
  if (const Node* p = reader.find("periodic")) periodic = as_bool(*p);
  std::vector<graph::Segment> segments;
  for (const Node* s : reader.all("segment")) {
    const matops::Vector v = as_vector(*s);
    if (v.size() != 2) fail(*s, "segment must be [graph_index, duration]");
    const int graph_index = static_cast<int>(v(0));
    if (graph_index != v(0) || graph_index < 1)
      fail(*s, "segment graph index must be a positive integer (1-based)");
    segments.push_back(
        {static_cast<std::size_t>(graph_index - 1), v(1)});
  }
  reader.finish();
  try {
    return graph::SwitchingSchedule(std::move(graphs), std::move(segments),
                                    periodic, dwell);
  } catch (const Error& err) {
    fail(node, std::string("schedule: ") + err.what());
  }
}

SimulationSettings bind_simulation(const Node& node) {
  BlockReader reader(expect_kind(node, Node::Kind::Block, "a block"),
                     "simulation");
  SimulationSettings settings;
  if (const Node* law = reader.find("law")) {
    try {
      settings.law = sim::law_from_string(as_word(*law));
    } catch (const Error& err) {
      fail(*law, err.what());
    }
  }
  if (const Node* v = reader.find("t_end")) settings.t_end = as_number(*v);
  if (const Node* v = reader.find("step")) settings.step = as_number(*v);
  if (const Node* v = reader.find("seed")) {
    expect_kind(*v, Node::Kind::Scalar, "a number");
    char* end = nullptr;
    settings.seed = std::strtoull(v->text.c_str(), &end, 10);
    if (end != v->text.c_str() + v->text.size())
      fail(*v, "seed must be a nonnegative integer");
  }
  if (const Node* v = reader.find("error_after"))
    settings.error_after = as_number(*v);
  if (const Node* v = reader.find("convergence_tol"))
    settings.convergence_tol = as_number(*v);
  reader.finish();
  if (!(settings.step > 0)) fail(node, "simulation: step must be positive");
  if (settings.t_end < 0) fail(node, "simulation: t_end must be nonnegative");
  return settings;
}

InitialSpec bind_initials(const Node& node) {
  BlockReader reader(expect_kind(node, Node::Kind::Block, "a block"),
                     "initials");
  InitialSpec spec;
  if (const Node* r = reader.find("random")) spec.random = as_bool(*r);
  for (const Node* x : reader.all("x")) spec.x.push_back(as_vector(*x));
  reader.finish();
  if (!spec.x.empty()) spec.random = false;
  if (!spec.random && spec.x.empty())
    fail(node, "initials: give x vectors or set random true");
  return spec;
}

synthesis::AgentGainSpec bind_agent_gains(const Node& node, int index) {
  const std::string ctx = "gains agent " + std::to_string(index);
  BlockReader reader(expect_kind(node, Node::Kind::Block, "a block"), ctx);
  synthesis::AgentGainSpec spec;
  auto grab = [&](const char* key, std::optional<matops::Matrix>& dst) {
    if (const Node* v = reader.find(key)) dst = as_matrix(*v);
  };
  grab("K1", spec.K1);
  grab("K2", spec.K2);
  grab("K3", spec.K3);
  grab("L1", spec.L1);
  grab("L2", spec.L2);
  grab("L", spec.L);
  grab("X1", spec.X1);
  grab("U1", spec.U1);
  grab("X2", spec.X2);
  grab("U2", spec.U2);
  reader.finish();
  return spec;
}

synthesis::GainSpec bind_gains(const Node& node) {
  BlockReader reader(expect_kind(node, Node::Kind::Block, "a block"),
                     "gains");
  synthesis::GainSpec spec;
  if (const Node* v = reader.find("L0")) spec.L0 = as_matrix(*v);
  if (const Node* v = reader.find("P")) spec.P = as_matrix(*v);
  if (const Node* v = reader.find("mu_star")) spec.mu_star = as_number(*v);
  if (const Node* v = reader.find("decay_c")) spec.decay_c = as_number(*v);
  int index = 0;
  for (const Node* a : reader.all("agent"))
    spec.agents.push_back(bind_agent_gains(*a, ++index));
  reader.finish();
  return spec;
}

Node parse_tree(std::string_view text) {
  Lexer lex(text);
  Node root;
  root.kind = Node::Kind::Block;
  root.items = parse_items(lex, /*top_level=*/true);
  return root;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  const Node root = parse_tree(text);
  BlockReader reader(root, "scenario");

  std::string name = "scenario";
  if (const Node* n = reader.find("name")) name = as_word(*n);

  std::vector<model::AgentModel> agents;
  std::vector<model::DisturbanceExosystem> disturbances;
  int agent_index = 0;
  for (const Node* a : reader.all("agent")) {
    AgentParse parsed = bind_agent(*a, ++agent_index);
    agents.push_back(std::move(parsed.agent));
    disturbances.push_back(std::move(parsed.disturbance));
  }
  if (agents.empty())
    throw ParseError("scenario has no agent blocks", root.line, root.col);

  const Node* leader_node = reader.find("leader");
  if (!leader_node)
    throw ParseError("missing required block 'leader'", root.line, root.col);
  model::LeaderExosystem leader = bind_leader(*leader_node);

  std::vector<graph::CommGraph> graphs;
  int graph_index = 0;
  for (const Node* g : reader.all("graph"))
    graphs.push_back(bind_graph(*g, ++graph_index));
  if (graphs.empty())
    throw ParseError("scenario has no graph blocks", root.line, root.col);
  for (std::size_t i = 0; i < graphs.size(); ++i)
    if (graphs[i].followers() != static_cast<int>(agents.size()))
      throw ParseError("graph " + std::to_string(i + 1) + " has " +
                           std::to_string(graphs[i].followers()) +
                           " followers, scenario has " +
                           std::to_string(agents.size()),
                       root.line, root.col);

  const Node* schedule_node = reader.find("schedule");
  if (!schedule_node)
    throw ParseError("missing required block 'schedule'", root.line, root.col);
  graph::SwitchingSchedule schedule =
      bind_schedule(*schedule_node, std::move(graphs));

  SimulationSettings settings;
  if (const Node* s = reader.find("simulation")) settings = bind_simulation(*s);

  InitialSpec initials;
  if (const Node* i = reader.find("initials")) initials = bind_initials(*i);
  if (!initials.random) {
    if (initials.x.size() != agents.size())
      throw ParseError("initials: need one x vector per agent", root.line,
                       root.col);
    for (std::size_t i = 0; i < agents.size(); ++i)
      if (initials.x[i].size() != agents[i].state_dim())
        throw ParseError("initials: x for agent " + std::to_string(i + 1) +
                             " has wrong length",
                         root.line, root.col);
  }

  synthesis::GainSpec gain_spec;
  if (const Node* g = reader.find("gains")) {
    gain_spec = bind_gains(*g);
    if (!gain_spec.agents.empty() && gain_spec.agents.size() != agents.size())
      fail(*g, "gains: agent blocks are positional and must cover every "
               "follower (" + std::to_string(agents.size()) + ")");
  }

  reader.finish();
  return Scenario{std::move(name),     std::move(agents),
                  std::move(disturbances), std::move(leader),
                  std::move(schedule), settings,
                  std::move(initials), std::move(gain_spec)};
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open scenario file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_vector(const matops::Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v(i));
  }
  return out + "]";
}

std::string fmt_matrix(const matops::Matrix& m) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) out += ", ";
    out += "[";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ", ";
      out += fmt(m(i, j));
    }
    out += "]";
  }
  return out + "]";
}

void write_gain_entry(std::ostream& os, const char* key,
                      const std::optional<matops::Matrix>& m,
                      const char* indent) {
  if (m) os << indent << key << " " << fmt_matrix(*m) << "\n";
}

void write_gain_spec(std::ostream& os, const synthesis::GainSpec& spec) {
  os << "gains {\n";
  write_gain_entry(os, "L0", spec.L0, "  ");
  write_gain_entry(os, "P", spec.P, "  ");
  if (spec.mu_star) os << "  mu_star " << fmt(*spec.mu_star) << "\n";
  if (spec.decay_c) os << "  decay_c " << fmt(*spec.decay_c) << "\n";
  for (const auto& agent : spec.agents) {
    os << "  agent {\n";
    write_gain_entry(os, "K1", agent.K1, "    ");
    write_gain_entry(os, "K2", agent.K2, "    ");
    write_gain_entry(os, "K3", agent.K3, "    ");
    write_gain_entry(os, "L1", agent.L1, "    ");
    write_gain_entry(os, "L2", agent.L2, "    ");
    write_gain_entry(os, "L", agent.L, "    ");
    write_gain_entry(os, "X1", agent.X1, "    ");
    write_gain_entry(os, "U1", agent.U1, "    ");
    write_gain_entry(os, "X2", agent.X2, "    ");
    write_gain_entry(os, "U2", agent.U2, "    ");
    os << "  }\n";
  }
  os << "}\n";
}

bool has_content(const synthesis::GainSpec& spec) {
  if (spec.L0 || spec.P || spec.mu_star || spec.decay_c) return true;
  for (const auto& a : spec.agents)
    if (a.K1 || a.K2 || a.K3 || a.L1 || a.L2 || a.L || a.X1 || a.U1 || a.X2 ||
        a.U2)
      return true;
  return false;
}

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream os;
  os << "name " << s.name << "\n\n";
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const auto& agent = s.agents[i];
    const auto& dist = s.disturbances[i];
    os << "agent {\n";
    os << "  A " << fmt_matrix(agent.A) << "\n";
    os << "  B " << fmt_matrix(agent.B) << "\n";
    os << "  C " << fmt_matrix(agent.C) << "\n";
    os << "  D " << fmt_matrix(agent.D) << "\n";
    if (agent.disturbance_dim() > 0) {
      os << "  E " << fmt_matrix(agent.E) << "\n";
      os << "  disturbance {\n";
      os << "    S " << fmt_matrix(dist.S) << "\n";
      os << "    initial " << fmt_vector(dist.initial) << "\n";
      os << "  }\n";
    }
    os << "}\n\n";
  }
  os << "leader {\n";
  os << "  S0 " << fmt_matrix(s.leader.S0) << "\n";
  os << "  F0 " << fmt_matrix(s.leader.F0) << "\n";
  os << "  initial " << fmt_vector(s.leader.initial) << "\n";
  os << "}\n\n";
  for (const auto& g : s.schedule.graphs()) {
    os << "graph {\n";
    os << "  followers " << g.followers() << "\n";
    for (const auto& e : g.edges())
      os << "  edge [" << e.from << ", " << e.to << ", " << fmt(e.weight)
         << "]\n";
    os << "}\n\n";
  }
  os << "schedule {\n";
  os << "  dwell_time " << fmt(s.schedule.dwell_time()) << "\n";
  os << "  periodic " << (s.schedule.periodic() ? "true" : "false") << "\n";
  for (const auto& seg : s.schedule.segments())
    os << "  segment [" << (seg.graph + 1) << ", " << fmt(seg.duration)
       << "]\n";
  os << "}\n\n";
  os << "simulation {\n";
  os << "  law " << sim::to_string(s.simulation.law) << "\n";
  os << "  t_end " << fmt(s.simulation.t_end) << "\n";
  os << "  step " << fmt(s.simulation.step) << "\n";
  os << "  seed " << s.simulation.seed << "\n";
  os << "  error_after " << fmt(s.simulation.error_after) << "\n";
  os << "  convergence_tol " << fmt(s.simulation.convergence_tol) << "\n";
  os << "}\n\n";
  os << "initials {\n";
  if (s.initials.random) {
    os << "  random true\n";
  } else {
    for (const auto& x : s.initials.x)
      os << "  x " << fmt_vector(x) << "\n";
  }
  os << "}\n";
  if (has_content(s.gain_overrides)) {
    os << "\n";
    write_gain_spec(os, s.gain_overrides);
  }
  return os.str();
}

std::string serialize_gain_set(const synthesis::GainSet& gains) {
  synthesis::GainSpec spec;
  spec.L0 = gains.L0;
  spec.P = gains.P;
  spec.mu_star = gains.mu_star;
  spec.decay_c = gains.decay_c;
  for (const auto& a : gains.agents) {
    synthesis::AgentGainSpec s;
    s.K1 = a.K1;
    s.K2 = a.K2;
    s.K3 = a.K3;
    s.L1 = a.L1;
    s.L2 = a.L2;
    s.L = a.L;
    s.X1 = a.regulator.X1;
    s.U1 = a.regulator.U1;
    s.X2 = a.regulator.X2;
    s.U2 = a.regulator.U2;
    spec.agents.push_back(std::move(s));
  }
  std::ostringstream os;
  write_gain_spec(os, spec);
  return os.str();
}

synthesis::GainSpec parse_gain_file(std::string_view text) {
  const Node root = parse_tree(text);
  BlockReader reader(root, "gain file");
  const Node* gains = reader.find("gains");
  if (!gains)
    throw ParseError("gain file must contain a 'gains { ... }' block",
                     root.line, root.col);
  synthesis::GainSpec spec = bind_gains(*gains);
  reader.finish();
  return spec;
}

std::vector<matops::Vector> draw_initials(const Scenario& s,
                                          std::uint64_t seed) {
  if (!s.initials.random) return s.initials.x;
  // Platform-independent uniform draw on [-1, 1]: top 53 bits of the
  // standardized mt19937_64 stream.
  std::mt19937_64 rng(seed);
  std::vector<matops::Vector> out;
  for (const auto& agent : s.agents) {
    matops::Vector x(agent.state_dim());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double u =
          static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
      x(k) = 2.0 * u - 1.0;
    }
    out.push_back(std::move(x));
  }
  return out;
}

const std::string& paper_example_text() {
  static const std::string text = R"(# Bundled reference scenario: three unit-mass mass-damper-spring followers
# track a harmonic-oscillator leader under a periodically switching
# topology. The gains block injects the published controller gains; the
# regulator solutions and feedforward gains are synthesized.

name paper_example

agent {
  mass_damper_spring { f 1  g 1 }
  disturbance {
    S [[0, 1], [0, 0]]
    coupling [1, 0]
    initial [1, 0.2]
  }
}

agent {
  mass_damper_spring { f 0  g 1 }
  disturbance {
    S [[0]]
    coupling [1]
    initial [0.5]
  }
}

agent {
  mass_damper_spring { f 1  g 0 }
  disturbance {
    S [[0, 1], [-1, 0]]
    coupling [1, 0]
    initial [0.5, 0.5]
  }
}

leader {
  S0 [[0, 1], [-1, 0]]
  F0 [[1, 0]]
  initial [0, 1]
}

graph {
  followers 3
  edge [0, 1, 1]
  edge [1, 2, 1]
  edge [2, 1, 1]
  edge [0, 3, 1]
}

graph {
  followers 3
  edge [0, 1, 1]
  edge [0, 2, 1]
  edge [2, 3, 1]
  edge [3, 2, 1]
}

schedule {
  dwell_time 5
  periodic true
  segment [1, 5]
  segment [2, 5]
}

simulation {
  law full-order
  t_end 30
  step 0.001
  seed 0
  error_after 21
  convergence_tol 0.002
}

initials { random true }

gains {
  L0 [[-1.3522], [-0.4142]]
  agent {
    K1 [[0, 0]]
    L1 [[-1.9813], [-1.4628]]
    L2 [[-3.1445], [-1]]
    L [[0, -1], [0, -1]]
  }
  agent {
    K1 [[-1, 0]]
    L1 [[-1.7321], [-1]]
    L2 [[-1]]
    L [[0, -1]]
  }
  agent {
    K1 [[0, -1]]
    L1 [[-2.1607], [-1.8343]]
    L2 [[-0.886], [1.1023]]
    L [[0, -1], [0, 0]]
  }
}
)";
  return text;
}

}  // namespace dobcoord::scenario
