#pragma once

#include "sheetaudit/workbook.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sheetaudit {

// ---------------------------------------------------------------------------
// References

struct CellRef {
    std::optional<std::string> sheet;
    int column = 0;
    int row = 0;
    bool column_absolute = false;
    bool row_absolute = false;

    friend bool operator==(const CellRef&, const CellRef&) = default;
};

/// Normalised so that start is the top-left and end the bottom-right corner.
/// Both corners carry the same sheet qualifier.
struct RangeRef {
    CellRef start;
    CellRef end;

    friend bool operator==(const RangeRef&, const RangeRef&) = default;
};

using RefTarget = std::variant<CellRef, RangeRef>;

/// Builds a RangeRef from two corners in any order; absolute flags travel
/// with their coordinate.
RangeRef make_range(const CellRef& a, const CellRef& b);

const std::optional<std::string>& reference_sheet(const RefTarget& target);

/// Bottom-right cell of the target (the cell itself for a CellRef).
CellRef reference_far_corner(const RefTarget& target);

/// A1 text of a reference, e.g. "'My Sheet'!$A$1:B2".
std::string format_reference(const RefTarget& target);

// ---------------------------------------------------------------------------
// Syntax tree

/// Deep-copying owning pointer so that syntax trees behave as values.
template <class T>
class Box {
public:
    Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT(google-explicit-constructor)
    Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
    Box(Box&&) noexcept = default;
    Box& operator=(const Box& other) {
        if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
        return *this;
    }
    Box& operator=(Box&&) noexcept = default;
    ~Box() = default;

    const T& operator*() const { return *ptr_; }
    T& operator*() { return *ptr_; }
    const T* operator->() const { return ptr_.get(); }
    T* operator->() { return ptr_.get(); }

    friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

private:
    std::unique_ptr<T> ptr_;
};

struct FormulaAst;

struct NumberLit {
    double value = 0;
    friend bool operator==(const NumberLit&, const NumberLit&) = default;
};

struct TextLit {
    std::string value;
    friend bool operator==(const TextLit&, const TextLit&) = default;
};

struct BoolLit {
    bool value = false;
    friend bool operator==(const BoolLit&, const BoolLit&) = default;
};

struct Ref {
    RefTarget target;
    friend bool operator==(const Ref&, const Ref&) = default;
};

struct FunctionCall {
    std::string name;  ///< Upper case, e.g. "SUM".
    std::vector<FormulaAst> args;
};

enum class BinaryOp { add, subtract, multiply, divide, power, concat, equal, not_equal, less, less_equal, greater, greater_equal };
enum class UnaryOp { negate, plus, percent };

struct Binary {
    BinaryOp op;
    Box<FormulaAst> left;
    Box<FormulaAst> right;
    friend bool operator==(const Binary&, const Binary&) = default;
};

struct Unary {
    UnaryOp op;
    Box<FormulaAst> operand;
    friend bool operator==(const Unary&, const Unary&) = default;
};

struct Paren {
    Box<FormulaAst> inner;
    friend bool operator==(const Paren&, const Paren&) = default;
};

struct FormulaAst {
    std::variant<NumberLit, TextLit, BoolLit, Ref, FunctionCall, Binary, Unary, Paren> node;

    friend bool operator==(const FormulaAst&, const FormulaAst&) = default;
};

bool operator==(const FunctionCall& a, const FunctionCall& b);

std::string_view binary_op_symbol(BinaryOp op);

// ---------------------------------------------------------------------------
// Operations

/// Parses A1-dialect formula text beginning with '=' (leading whitespace
/// allowed). Precedence from tightest: postfix %, prefix + -, ^, * /, + -,
/// &, comparisons. All binary operators are left-associative; the argument
/// separator is ','.
///
/// Throws SyntaxError, or UnsupportedConstruct for array literals, defined
/// names, structured/external/3-D references, whole row/column ranges,
/// error literals and empty arguments.
FormulaAst parse_formula(std::string_view text);

/// Compact A1 text with a leading '='. Trees produced by parse_formula
/// reprint to text that parses back to an equal tree.
std::string print_formula(const FormulaAst& ast);

/// Every reference in depth-first, left-to-right order; duplicates kept.
std::vector<RefTarget> extract_references(const FormulaAst& ast);

/// Numeric literals in depth-first order. A negation applied directly to a
/// literal yields one negative constant.
std::vector<double> extract_constants(const FormulaAst& ast);

std::vector<std::string> extract_text_literals(const FormulaAst& ast);

/// Position-independent rendering: relative references become offsets from
/// `origin` (R[-1]C[-1]), absolute ones R<n>C<n>. Whitespace free, no '='.
std::string normalize_r1c1(const FormulaAst& ast, const CellAddress& origin);

/// Moves every relative reference component by the given offsets, as a host
/// application does when a formula is copied. Throws UnsupportedConstruct if
/// a reference would leave the grid.
FormulaAst shift_relative_references(FormulaAst ast, int column_offset, int row_offset);

/// Shortest decimal text that reads back to the same double ("1.19", "-5").
std::string canonical_number(double value);

}  // namespace sheetaudit
