#include "hsw/parser.hpp"

#include <cctype>
#include <vector>

#include "hsw/errors.hpp"

namespace hsw {

namespace {

struct Token {
  enum Type {
    Ident, Number, LParen, RParen, LBracket, RBracket,
    Comma, Colon, Dot, Star, TruncSubOp, Plus, Minus, Tilde, End
  } type;
  std::string text;
  Rat num;
  int line = 1, col = 1;
};

const char* token_name(Token::Type t) {
  switch (t) {
    case Token::Ident: return "identifier";
    case Token::Number: return "number";
    case Token::LParen: return "'('";
    case Token::RParen: return "')'";
    case Token::LBracket: return "'['";
    case Token::RBracket: return "']'";
    case Token::Comma: return "','";
    case Token::Colon: return "':'";
    case Token::Dot: return "'.'";
    case Token::Star: return "'*'";
    case Token::TruncSubOp: return "'-.'";
    case Token::Plus: return "'+'";
    case Token::Minus: return "'-'";
    case Token::Tilde: return "'~'";
    case Token::End: return "end of input";
  }
  return "?";
}

std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto bump = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i + k] == '\n') { ++line; col = 1; }
      else ++col;
    }
    i += n;
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { bump(1); continue; }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') bump(1);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      tok.type = Token::Ident;
      tok.text = src.substr(i, j - i);
      bump(j - i);
      out.push_back(tok);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      std::string text = src.substr(i, j - i);
      if (j < src.size() && src[j] == '/' && j + 1 < src.size() &&
          std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        size_t k = j + 1;
        while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
        text = src.substr(i, k - i);
        j = k;
      }
      tok.type = Token::Number;
      tok.text = text;
      try {
        tok.num = rat_from_string(text);
      } catch (const InputError& e) {
        throw InputError("at line " + std::to_string(line) + ", col " +
                         std::to_string(col) + ": " + e.what());
      }
      bump(j - i);
      out.push_back(tok);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '.') {
      tok.type = Token::TruncSubOp;
      tok.text = "-.";
      bump(2);
      out.push_back(tok);
      continue;
    }
    switch (c) {
      case '(': tok.type = Token::LParen; break;
      case ')': tok.type = Token::RParen; break;
      case '[': tok.type = Token::LBracket; break;
      case ']': tok.type = Token::RBracket; break;
      case ',': tok.type = Token::Comma; break;
      case ':': tok.type = Token::Colon; break;
      case '.': tok.type = Token::Dot; break;
      case '*': tok.type = Token::Star; break;
      case '+': tok.type = Token::Plus; break;
      case '-': tok.type = Token::Minus; break;
      case '~': tok.type = Token::Tilde; break;
      default:
        throw InputError("unexpected character '" + std::string(1, c) +
                         "' at line " + std::to_string(line) + ", col " +
                         std::to_string(col));
    }
    tok.text = std::string(1, c);
    bump(1);
    out.push_back(tok);
  }
  Token end;
  end.type = Token::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& src) : toks_(tokenize(src)) {}

  FormulaPtr formula() {
    FormulaPtr f = parse_formula();
    expect(Token::End);
    return f;
  }

  TermPtr term() {
    TermPtr t = parse_term();
    expect(Token::End);
    return t;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  std::vector<std::pair<std::string, Sort>> scope_;

  const Token& peek() const { return toks_[pos_]; }
  const Token& get() { return toks_[pos_++]; }

  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw InputError("at line " + std::to_string(at.line) + ", col " +
                     std::to_string(at.col) + ": " + msg);
  }

  const Token& expect(Token::Type type) {
    if (peek().type != type)
      fail(peek(), std::string("expected ") + token_name(type) + ", got " +
                       token_name(peek().type) +
                       (peek().type == Token::Ident ? " '" + peek().text + "'" : ""));
    return get();
  }

  bool accept(Token::Type type) {
    if (peek().type != type) return false;
    ++pos_;
    return true;
  }

  const Sort* lookup(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

  // Reruns a construction step so InputError from the smart constructors
  // (cap or sort violations) gains a source position.
  template <typename Fn>
  auto at(const Token& tok, Fn fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const InputError& e) {
      std::string what = e.what();
      if (what.rfind("at line", 0) == 0) throw;
      fail(tok, what);
    }
  }

  Sort parse_sort() {
    const Token& tok = expect(Token::Ident);
    if (tok.text == "Q") return Sort::marked();
    if (tok.text.size() >= 2 && tok.text[0] == 'B') {
      for (size_t k = 1; k < tok.text.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(tok.text[k])))
          fail(tok, "expected sort B<n> or Q, got '" + tok.text + "'");
      int r = std::stoi(tok.text.substr(1));
      if (r < 1) fail(tok, "ball sort radius must be at least 1");
      return Sort::ball(r);
    }
    fail(tok, "expected sort B<n> or Q, got '" + tok.text + "'");
  }

  Rat parse_signed_rat() {
    bool neg = accept(Token::Minus);
    const Token& tok = expect(Token::Number);
    return neg ? Rat(-tok.num) : tok.num;
  }

  void parse_gaussian(Rat& re, Rat& im) {
    re = 0;
    im = 0;
    int sign = accept(Token::Minus) ? -1 : 1;
    if (peek().type == Token::Ident && peek().text == "i") {
      get();
      im = sign;
      return;
    }
    const Token& first = expect(Token::Number);
    if (peek().type == Token::Ident && peek().text == "i") {
      get();
      im = sign * first.num;
      return;
    }
    re = sign * first.num;
    int sign2;
    if (accept(Token::Plus)) sign2 = 1;
    else if (accept(Token::Minus)) sign2 = -1;
    else return;
    if (peek().type == Token::Ident && peek().text == "i") {
      get();
      im = sign2;
      return;
    }
    const Token& second = expect(Token::Number);
    const Token& itok = expect(Token::Ident);
    if (itok.text != "i") fail(itok, "expected 'i' after imaginary part");
    im = sign2 * second.num;
  }

  long parse_word_index() {
    const Token& tok = expect(Token::Number);
    if (tok.num.get_den() != 1 || tok.num <= 0)
      fail(tok, "word indices must be positive integers");
    if (!tok.num.get_num().fits_slong_p())
      fail(tok, "word index out of range");
    return tok.num.get_num().get_si();
  }

  TermPtr parse_term() {
    const Token& tok = peek();
    if (tok.type == Token::Number) {
      if (tok.num != 0) fail(tok, "expected a term; bare numbers denote the zero vector only as 0:<sort>");
      get();
      expect(Token::Colon);
      Sort s = parse_sort();
      return at(tok, [&] { return t_zero(s); });
    }
    if (tok.type != Token::Ident)
      fail(tok, std::string("expected a term, got ") + token_name(tok.type));
    get();
    const std::string& name = tok.text;
    if (name == "add" || name == "sub") {
      expect(Token::LParen);
      TermPtr a = parse_term();
      expect(Token::Comma);
      TermPtr b = parse_term();
      expect(Token::RParen);
      return at(tok, [&] { return name == "add" ? t_add(a, b) : t_sub(a, b); });
    }
    if (name == "scale") {
      expect(Token::LParen);
      Rat re, im;
      parse_gaussian(re, im);
      expect(Token::Comma);
      TermPtr a = parse_term();
      expect(Token::RParen);
      return at(tok, [&] { return t_scale(re, im, a); });
    }
    if (name == "qu") {
      expect(Token::LParen);
      TermPtr a = parse_term();
      expect(Token::RParen);
      return at(tok, [&] { return t_qu(a); });
    }
    if (name == "w") {
      expect(Token::LBracket);
      std::vector<long> idx;
      idx.push_back(parse_word_index());
      while (accept(Token::Comma)) idx.push_back(parse_word_index());
      expect(Token::RBracket);
      expect(Token::LParen);
      TermPtr cur = parse_term();
      expect(Token::RParen);
      for (size_t k = idx.size(); k-- > 0;)
        cur = at(tok, [&] { return t_apply("#" + std::to_string(idx[k]), cur); });
      return cur;
    }
    if (peek().type == Token::Tilde) {
      get();
      expect(Token::LParen);
      TermPtr a = parse_term();
      expect(Token::RParen);
      if (lookup(name)) fail(tok, "variable '" + name + "' used as an operator");
      return at(tok, [&] { return t_apply_inv(name, a); });
    }
    if (peek().type == Token::LParen) {
      get();
      TermPtr a = parse_term();
      expect(Token::RParen);
      if (lookup(name)) fail(tok, "variable '" + name + "' used as an operator");
      return at(tok, [&] { return t_apply(name, a); });
    }
    if (const Sort* s = lookup(name)) return t_var(name, *s);
    return t_const(name);
  }

  FormulaPtr parse_formula() {
    const Token& tok = peek();
    if (tok.type == Token::Ident && (tok.text == "sup" || tok.text == "inf")) {
      get();
      const Token& vtok = expect(Token::Ident);
      std::string var = vtok.text;
      expect(Token::Colon);
      Sort s = parse_sort();
      expect(Token::Dot);
      scope_.emplace_back(var, s);
      FormulaPtr body = parse_formula();
      scope_.pop_back();
      return at(tok, [&] {
        return tok.text == "sup" ? mk_sup(var, s, body) : mk_inf(var, s, body);
      });
    }
    return parse_truncsub();
  }

  FormulaPtr parse_truncsub() {
    FormulaPtr f = parse_prod();
    while (peek().type == Token::TruncSubOp) {
      const Token& tok = get();
      FormulaPtr rhs = parse_prod();
      f = at(tok, [&] { return mk_truncsub(f, rhs); });
    }
    return f;
  }

  FormulaPtr parse_prod() {
    FormulaPtr f = parse_atom();
    while (peek().type == Token::Star) {
      const Token& tok = get();
      FormulaPtr rhs = parse_atom();
      f = at(tok, [&] { return mk_prod(f, rhs); });
    }
    return f;
  }

  FormulaPtr parse_atom() {
    const Token& tok = peek();
    if (tok.type == Token::LParen) {
      get();
      FormulaPtr f = parse_formula();
      expect(Token::RParen);
      return f;
    }
    if (tok.type == Token::Number || tok.type == Token::Minus)
      return mk_rat(parse_signed_rat());
    if (tok.type != Token::Ident)
      fail(tok, std::string("expected a formula, got ") + token_name(tok.type));
    if (tok.text == "sup" || tok.text == "inf")
      fail(tok, "a quantifier in operand position needs parentheses");
    get();
    const std::string& head = tok.text;
    if (head == "d" || head == "reip" || head == "imip") {
      expect(Token::LParen);
      TermPtr a = parse_term();
      expect(Token::Comma);
      TermPtr b = parse_term();
      expect(Token::RParen);
      return at(tok, [&] {
        if (head == "d") return mk_d(a, b);
        return head == "reip" ? mk_reip(a, b) : mk_imip(a, b);
      });
    }
    if (head == "half") {
      expect(Token::LParen);
      FormulaPtr f = parse_formula();
      expect(Token::RParen);
      return mk_half(f);
    }
    if (head == "min" || head == "max" || head == "adiff") {
      expect(Token::LParen);
      FormulaPtr a = parse_formula();
      expect(Token::Comma);
      FormulaPtr b = parse_formula();
      expect(Token::RParen);
      if (head == "min") return mk_min(a, b);
      return head == "max" ? mk_max(a, b) : mk_absdiff(a, b);
    }
    if (head == "not") {
      expect(Token::LBracket);
      Rat cap = parse_signed_rat();
      expect(Token::RBracket);
      expect(Token::LParen);
      FormulaPtr f = parse_formula();
      expect(Token::RParen);
      return at(tok, [&] { return mk_neg(cap, f); });
    }
    if (head == "plus") {
      expect(Token::LBracket);
      Rat cap = parse_signed_rat();
      expect(Token::RBracket);
      expect(Token::LParen);
      FormulaPtr a = parse_formula();
      expect(Token::Comma);
      FormulaPtr b = parse_formula();
      expect(Token::RParen);
      return at(tok, [&] { return mk_truncadd(cap, a, b); });
    }
    fail(tok, "unknown formula head '" + head + "'");
  }
};

}  // namespace

FormulaPtr parse_formula_text(const std::string& src) {
  return Parser(src).formula();
}

TermPtr parse_term_text(const std::string& src) {
  return Parser(src).term();
}

}  // namespace hsw
