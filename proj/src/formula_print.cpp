#include "sheetaudit/error.hpp"
#include "sheetaudit/formula.hpp"

#include <charconv>
#include <functional>

namespace sheetaudit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Binding strength, loosest first.
enum Level : int { kComparison = 1, kConcat, kAdditive, kMultiplicative, kPower, kPrefix, kPostfix, kPrimary };

int level_of(BinaryOp op) {
    switch (op) {
        case BinaryOp::add:
        case BinaryOp::subtract: return kAdditive;
        case BinaryOp::multiply:
        case BinaryOp::divide: return kMultiplicative;
        case BinaryOp::power: return kPower;
        case BinaryOp::concat: return kConcat;
        default: return kComparison;
    }
}

int level_of(const FormulaAst& ast) {
    return std::visit(overloaded{
                          [](const Binary& b) { return level_of(b.op); },
                          [](const Unary& u) { return u.op == UnaryOp::percent ? int{kPostfix} : int{kPrefix}; },
                          [](const auto&) { return int{kPrimary}; },
                      },
                      ast.node);
}

using RefFormatter = std::function<std::string(const RefTarget&)>;

class Printer {
public:
    explicit Printer(RefFormatter refs) : refs_(std::move(refs)) {}

    void print(const FormulaAst& ast, int min_level) {
        // Trees that do not respect precedence get explicit parentheses.
        const bool wrap = level_of(ast) < min_level;
        if (wrap) out_ += '(';
        std::visit(overloaded{
                       [&](const NumberLit& n) { out_ += canonical_number(n.value); },
                       [&](const TextLit& t) {
                           out_ += '"';
                           for (char c : t.value) {
                               if (c == '"') out_ += '"';
                               out_ += c;
                           }
                           out_ += '"';
                       },
                       [&](const BoolLit& b) { out_ += b.value ? "TRUE" : "FALSE"; },
                       [&](const Ref& r) { out_ += refs_(r.target); },
                       [&](const FunctionCall& f) {
                           out_ += f.name;
                           out_ += '(';
                           for (std::size_t i = 0; i < f.args.size(); ++i) {
                               if (i) out_ += ',';
                               print(f.args[i], kComparison);
                           }
                           out_ += ')';
                       },
                       [&](const Binary& b) {
                           const int level = level_of(b.op);
                           print(*b.left, level);
                           out_ += binary_op_symbol(b.op);
                           print(*b.right, level + 1);
                       },
                       [&](const Unary& u) {
                           if (u.op == UnaryOp::percent) {
                               print(*u.operand, kPostfix);
                               out_ += '%';
                           } else {
                               out_ += u.op == UnaryOp::negate ? '-' : '+';
                               print(*u.operand, kPrefix);
                           }
                       },
                       [&](const Paren& p) {
                           out_ += '(';
                           print(*p.inner, kComparison);
                           out_ += ')';
                       },
                   },
                   ast.node);
        if (wrap) out_ += ')';
    }

    std::string take() { return std::move(out_); }

private:
    RefFormatter refs_;
    std::string out_;
};

std::string sheet_prefix(const std::optional<std::string>& sheet) {
    return sheet ? quote_sheet_name(*sheet) + "!" : std::string{};
}

std::string r1c1_axis(char axis, int value, int origin, bool absolute) {
    std::string out(1, axis);
    if (absolute) return out + std::to_string(value + 1);
    const int delta = value - origin;
    if (delta != 0) out += "[" + std::to_string(delta) + "]";
    return out;
}

std::string r1c1_cell(const CellRef& ref, const CellAddress& origin) {
    return r1c1_axis('R', ref.row, origin.row, ref.row_absolute) +
           r1c1_axis('C', ref.column, origin.column, ref.column_absolute);
}

template <class Fn>
void for_each_cell_ref(FormulaAst& ast, Fn&& fn) {
    std::visit(overloaded{
                   [&](Ref& r) {
                       std::visit(overloaded{
                                      [&](CellRef& c) { fn(c); },
                                      [&](RangeRef& range) {
                                          fn(range.start);
                                          fn(range.end);
                                      },
                                  },
                                  r.target);
                   },
                   [&](FunctionCall& f) {
                       for (auto& arg : f.args) for_each_cell_ref(arg, fn);
                   },
                   [&](Binary& b) {
                       for_each_cell_ref(*b.left, fn);
                       for_each_cell_ref(*b.right, fn);
                   },
                   [&](Unary& u) { for_each_cell_ref(*u.operand, fn); },
                   [&](Paren& p) { for_each_cell_ref(*p.inner, fn); },
                   [](auto&) {},
               },
               ast.node);
}

template <class Fn>
void walk(const FormulaAst& ast, Fn&& fn) {
    if (!fn(ast)) return;
    std::visit(overloaded{
                   [&](const FunctionCall& f) {
                       for (const auto& arg : f.args) walk(arg, fn);
                   },
                   [&](const Binary& b) {
                       walk(*b.left, fn);
                       walk(*b.right, fn);
                   },
                   [&](const Unary& u) { walk(*u.operand, fn); },
                   [&](const Paren& p) { walk(*p.inner, fn); },
                   [](const auto&) {},
               },
               ast.node);
}

}  // namespace

bool operator==(const FunctionCall& a, const FunctionCall& b) { return a.name == b.name && a.args == b.args; }

std::string_view binary_op_symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::add: return "+";
        case BinaryOp::subtract: return "-";
        case BinaryOp::multiply: return "*";
        case BinaryOp::divide: return "/";
        case BinaryOp::power: return "^";
        case BinaryOp::concat: return "&";
        case BinaryOp::equal: return "=";
        case BinaryOp::not_equal: return "<>";
        case BinaryOp::less: return "<";
        case BinaryOp::less_equal: return "<=";
        case BinaryOp::greater: return ">";
        case BinaryOp::greater_equal: return ">=";
    }
    return "?";
}

std::string canonical_number(double value) {
    if (value == 0) value = 0;  // folds -0
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

const std::optional<std::string>& reference_sheet(const RefTarget& target) {
    return std::visit(overloaded{
                          [](const CellRef& c) -> const std::optional<std::string>& { return c.sheet; },
                          [](const RangeRef& r) -> const std::optional<std::string>& { return r.start.sheet; },
                      },
                      target);
}

CellRef reference_far_corner(const RefTarget& target) {
    return std::visit(overloaded{
                          [](const CellRef& c) { return c; },
                          [](const RangeRef& r) { return r.end; },
                      },
                      target);
}

std::string format_reference(const RefTarget& target) {
    auto cell = [](const CellRef& c) {
        return format_a1(A1Address{c.column, c.row, c.column_absolute, c.row_absolute});
    };
    return std::visit(overloaded{
                          [&](const CellRef& c) { return sheet_prefix(c.sheet) + cell(c); },
                          [&](const RangeRef& r) { return sheet_prefix(r.start.sheet) + cell(r.start) + ":" + cell(r.end); },
                      },
                      target);
}

std::string print_formula(const FormulaAst& ast) {
    Printer printer(format_reference);
    printer.print(ast, kComparison);
    return "=" + printer.take();
}

std::string normalize_r1c1(const FormulaAst& ast, const CellAddress& origin) {
    Printer printer([&origin](const RefTarget& target) {
        return std::visit(overloaded{
                              [&](const CellRef& c) { return sheet_prefix(c.sheet) + r1c1_cell(c, origin); },
                              [&](const RangeRef& r) {
                                  return sheet_prefix(r.start.sheet) + r1c1_cell(r.start, origin) + ":" +
                                         r1c1_cell(r.end, origin);
                              },
                          },
                          target);
    });
    printer.print(ast, kComparison);
    return printer.take();
}

std::vector<RefTarget> extract_references(const FormulaAst& ast) {
    std::vector<RefTarget> refs;
    walk(ast, [&](const FormulaAst& node) {
        if (const auto* r = std::get_if<Ref>(&node.node)) refs.push_back(r->target);
        return true;
    });
    return refs;
}

std::vector<double> extract_constants(const FormulaAst& ast) {
    std::vector<double> constants;
    walk(ast, [&](const FormulaAst& node) {
        if (const auto* u = std::get_if<Unary>(&node.node); u && u->op == UnaryOp::negate) {
            if (const auto* n = std::get_if<NumberLit>(&u->operand->node)) {
                constants.push_back(-n->value);
                return false;
            }
        }
        if (const auto* n = std::get_if<NumberLit>(&node.node)) constants.push_back(n->value);
        return true;
    });
    return constants;
}

std::vector<std::string> extract_text_literals(const FormulaAst& ast) {
    std::vector<std::string> texts;
    walk(ast, [&](const FormulaAst& node) {
        if (const auto* t = std::get_if<TextLit>(&node.node)) texts.push_back(t->value);
        return true;
    });
    return texts;
}

FormulaAst shift_relative_references(FormulaAst ast, int column_offset, int row_offset) {
    for_each_cell_ref(ast, [&](CellRef& c) {
        if (!c.column_absolute) c.column += column_offset;
        if (!c.row_absolute) c.row += row_offset;
        if (c.column < 0 || c.row < 0) throw UnsupportedConstruct("reference shifted off the grid");
    });
    // Corners may swap order when only one of them is absolute.
    std::function<void(FormulaAst&)> renormalize = [&](FormulaAst& node) {
        std::visit(overloaded{
                       [&](Ref& r) {
                           if (auto* range = std::get_if<RangeRef>(&r.target)) *range = make_range(range->start, range->end);
                       },
                       [&](FunctionCall& f) {
                           for (auto& arg : f.args) renormalize(arg);
                       },
                       [&](Binary& b) {
                           renormalize(*b.left);
                           renormalize(*b.right);
                       },
                       [&](Unary& u) { renormalize(*u.operand); },
                       [&](Paren& p) { renormalize(*p.inner); },
                       [](auto&) {},
                   },
                   node.node);
    };
    renormalize(ast);
    return ast;
}

}  // namespace sheetaudit
