#include "hew/dsl.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace hew {

namespace {

void print_expr(const Expr& e, std::string& out) {
  switch (e.op) {
  case ExprOp::IntConst:
    out += std::to_string(e.value);
    return;
  case ExprOp::HyperParam:
    out += '$';
    out += e.name;
    return;
  case ExprOp::Feature:
    out += '@';
    out += e.name;
    return;
  default:
    break;
  }
  out += '(';
  out += expr_op_name(e.op);
  for (auto& k : e.kids) {
    out += ' ';
    print_expr(k, out);
  }
  out += ')';
}

struct Parser {
  const std::string& text;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Parser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::SyntaxError,
                msg + " at line " + std::to_string(line) + ", column " +
                    std::to_string(col));
  }

  void advance() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_ws() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == ';') {
        while (pos < text.size() && text[pos] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  std::string atom() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (c == '(' || c == ')' || c == ';' ||
          std::isspace(static_cast<unsigned char>(c)))
        break;
      advance();
    }
    if (pos == start) fail("expected token");
    return text.substr(start, pos - start);
  }

  Expr expr() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    char c = text[pos];
    if (c == '(') {
      advance();
      std::string op = atom();
      std::vector<Expr> kids;
      while (true) {
        skip_ws();
        if (pos >= text.size()) fail("unterminated '('");
        if (text[pos] == ')') {
          advance();
          break;
        }
        kids.push_back(expr());
      }
      static const std::pair<const char*, ExprOp> ops[] = {
          {"neg", ExprOp::Neg}, {"not", ExprOp::Not}, {"add", ExprOp::Add},
          {"sub", ExprOp::Sub}, {"mul", ExprOp::Mul}, {"div", ExprOp::Div},
          {"shr", ExprOp::Shr}, {"min", ExprOp::Min}, {"max", ExprOp::Max},
          {"lt", ExprOp::Lt},   {"le", ExprOp::Le},   {"eq", ExprOp::Eq},
          {"and", ExprOp::And}, {"or", ExprOp::Or},   {"if", ExprOp::If},
      };
      for (auto& [name, o] : ops) {
        if (op == name) {
          size_t want = (o == ExprOp::Neg || o == ExprOp::Not) ? 1
                        : o == ExprOp::If                      ? 3
                                                               : 2;
          if (kids.size() != want)
            fail("operator '" + op + "' expects " + std::to_string(want) +
                 " operands, got " + std::to_string(kids.size()));
          Expr e;
          e.op = o;
          e.kids = std::move(kids);
          return e;
        }
      }
      fail("unknown operator '" + op + "'");
    }
    if (c == ')') fail("unexpected ')'");
    std::string tok = atom();
    if (tok[0] == '@') {
      if (tok.size() == 1) fail("empty feature name");
      return Expr::feat(tok.substr(1));
    }
    if (tok[0] == '$') {
      if (tok.size() == 1) fail("empty hyperparameter name");
      return Expr::param(tok.substr(1));
    }
    if (tok == "true") return Expr::truec();
    if (tok == "false") return Expr::falsec();
    int64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      fail("expected integer, feature, or hyperparameter, got '" + tok + "'");
    return Expr::intc(v);
  }
};

// Parses one "[hyperparam]: name, int, lo, hi[, default]" line body
// (everything after the "[hyperparam]:" marker).
HyperParamSlot parse_slot_line(const std::string& body, int line_no) {
  auto fail = [&](const std::string& m) {
    throw Error(ErrorCode::SyntaxError,
                m + " at line " + std::to_string(line_no) + ", column 1");
  };
  std::vector<std::string> fields;
  std::string cur;
  for (char c : body) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  auto trim = [](std::string s) {
    size_t a = s.find_first_not_of(" \t");
    size_t b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  for (auto& f : fields) f = trim(f);
  if (fields.size() != 4 && fields.size() != 5)
    fail("hyperparam line needs 'name, int, lo, hi[, default]'");
  if (fields[0].empty()) fail("empty hyperparameter name");
  if (fields[1] != "int") fail("hyperparam kind must be 'int'");
  HyperParamSlot s;
  s.name = fields[0];
  auto num = [&](const std::string& f, const char* what) {
    int64_t v = 0;
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || p != f.data() + f.size())
      fail(std::string("bad ") + what + " '" + f + "'");
    return v;
  };
  s.lo = num(fields[2], "lo");
  s.hi = num(fields[3], "hi");
  s.def = fields.size() == 5 ? num(fields[4], "default") : s.lo;
  if (s.lo > s.hi)
    fail("slot '" + s.name + "' has lo > hi");
  if (s.def < s.lo || s.def > s.hi)
    fail("slot '" + s.name + "' default outside bounds");
  return s;
}

} // namespace

std::string print_template(const PolicyTemplate& t) {
  std::string out;
  for (auto& s : t.slots) {
    out += "[hyperparam]: " + s.name + ", int, " + std::to_string(s.lo) + ", " +
           std::to_string(s.hi);
    if (s.def != s.lo) out += ", " + std::to_string(s.def);
    out += '\n';
  }
  print_expr(t.root, out);
  out += '\n';
  return out;
}

PolicyTemplate parse_template(const std::string& text) {
  PolicyTemplate t;
  // Header pass: pull out "[hyperparam]:" lines, keep everything else for the
  // expression parser (preserving line structure for error positions).
  static const std::string marker = "[hyperparam]:";
  std::string body;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t start = line.find_first_not_of(" \t");
    std::string stripped =
        start == std::string::npos ? std::string() : line.substr(start);
    // Allow the comment-style form "// [hyperparam]: ..." as well.
    if (stripped.rfind("//", 0) == 0) {
      stripped = stripped.substr(2);
      size_t s2 = stripped.find_first_not_of(" \t");
      stripped = s2 == std::string::npos ? std::string() : stripped.substr(s2);
      if (stripped.rfind(marker, 0) != 0) stripped.clear();
    }
    if (stripped.rfind(marker, 0) == 0) {
      HyperParamSlot s = parse_slot_line(stripped.substr(marker.size()), line_no);
      for (auto& existing : t.slots)
        if (existing.name == s.name)
          throw Error(ErrorCode::SyntaxError,
                      "duplicate slot '" + s.name + "' at line " +
                          std::to_string(line_no) + ", column 1");
      t.slots.push_back(std::move(s));
      body += '\n';
    } else {
      body += line;
      body += '\n';
    }
  }
  Parser p(body);
  if (p.at_end())
    throw Error(ErrorCode::SyntaxError, "missing expression at line 1, column 1");
  t.root = p.expr();
  if (!p.at_end()) p.fail("trailing input after expression");
  // Every referenced slot must be declared.
  struct Walk {
    static void run(const Expr& e, const PolicyTemplate& t) {
      if (e.op == ExprOp::HyperParam && !t.slot(e.name))
        throw Error(ErrorCode::SyntaxError,
                    "missing slot declaration for '$" + e.name +
                        "' at line 1, column 1");
      for (auto& k : e.kids) run(k, t);
    }
  };
  Walk::run(t.root, t);
  return t;
}

} // namespace hew
