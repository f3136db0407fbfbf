#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Loop-description mini-language: parser, AST and static feature analysis.
//
// A `.loop` file describes the body of one annotated parallel loop.  The
// analyzer walks the AST and produces the per-iteration operation counts
// that feed the learning models, playing the role a compiler pass would
// play for a real loop body.
//
// Grammar (comments run from '#' to end of line):
//
//   loopspec  := "loop" trip "{" stmt* "}"
//   trip      := INT | "N"                      (N = resolved at dispatch)
//   stmt      := ("iassign"|"fassign") IDENT "=" expr ";"
//              | "if" "(" expr ")" "{" stmt* "}" ["else" "{" stmt* "}"]
//              | "call" IDENT ";"
//              | "loop" INT "{" stmt* "}"       (inner trips must be literal)
//              | ("ivar"|"fvar") IDENT ";"
//   expr      := infix over + - * / < <= > >= == != with parentheses;
//                leaves are IDENT, IDENT "[" expr "]", INT, FLOAT

namespace smartexec::loop_ir {

enum class ScalarType { Int, Float, Bool };

enum class BinOpKind { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne };

inline bool is_comparison(BinOpKind op) { return op >= BinOpKind::Lt; }

struct SourceLoc {
    int line = 0;
    int column = 0;
};

// Raised on any lexical or syntactic defect; carries the offending location.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, SourceLoc loc);
    SourceLoc where() const { return loc_; }

private:
    SourceLoc loc_;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct VarRef {
    std::string name;
};

struct IndexedRef {
    std::string array;
    ExprPtr index;
};

struct Literal {
    double value = 0.0;
};

struct BinOp {
    BinOpKind op;
    ExprPtr lhs;
    ExprPtr rhs;
};

struct Expr {
    std::variant<VarRef, IndexedRef, Literal, BinOp> node;
    // Resolved after parsing: leaves carry the variable/literal type,
    // BinOp carries its result type (comparisons are Bool).
    ScalarType type = ScalarType::Int;
    SourceLoc loc;
};

struct Statement;
using StmtList = std::vector<Statement>;

struct Assign {
    std::string lhs_var;
    ScalarType decl_type;  // Int for iassign, Float for fassign
    ExprPtr rhs;
};

struct If {
    ExprPtr cond;
    StmtList then_body;
    StmtList else_body;
};

struct Call {
    std::string name;
};

struct InnerLoop {
    std::int64_t trip_count;  // always a literal >= 1
    StmtList body;
};

struct Decl {
    std::string var;
    ScalarType scalar_type;
};

struct Statement {
    std::variant<Assign, If, Call, InnerLoop, Decl> node;
    SourceLoc loc;
};

// Trip count of the outermost loop: a literal or the symbol `N`,
// which is resolved at dispatch time.
struct TripCount {
    std::optional<std::int64_t> literal;  // nullopt == N
    bool is_symbolic() const { return !literal.has_value(); }
};

struct LoopAst {
    TripCount trip_count;
    StmtList body;
};

// All counts are per one iteration of the outermost loop; statements inside
// an inner loop of trip count m contribute m times their count, and nested
// inner loops multiply.
struct StaticFeatures {
    std::uint64_t total_ops = 0;
    std::uint64_t float_ops = 0;
    std::uint64_t comparison_ops = 0;
    std::uint64_t deepest_loop_level = 0;
    std::uint64_t num_int_vars = 0;
    std::uint64_t num_float_vars = 0;
    std::uint64_t num_if = 0;
    std::uint64_t num_if_inner = 0;
    std::uint64_t num_calls = 0;
    std::uint64_t num_calls_inner = 0;

    bool operator==(const StaticFeatures&) const = default;
};

struct DynamicFeatures {
    std::uint64_t num_threads = 1;
    std::uint64_t num_iterations = 1;
};

// Parses a loop spec. Throws ParseError with line/column on bad input.
LoopAst parse_loop_spec(const std::string& text);

// Counting contract (total function over any valid AST):
//  - total_ops: BinOp nodes plus Assign statements, loop-weighted.
//  - float_ops: BinOps with a Float operand plus Assigns whose rhs type is
//    Float, loop-weighted.  A name is Float if any `fvar`/`fassign` in the
//    spec says so (Float wins over Int on conflicting evidence); names and
//    array elements with no evidence take their context's type — Float in an
//    fassign rhs, Int in an iassign rhs, if conditions and index
//    expressions.
//  - comparison_ops: comparison BinOps (including those in `if` conditions),
//    loop-weighted.
//  - deepest_loop_level: maximum inner-loop nesting depth, 0 if none.
//  - num_if/num_calls: unweighted node counts; the `_inner` variants count
//    only nodes inside at least one inner loop.
//  - num_int_vars/num_float_vars: distinct scalar names declared, assigned
//    or referenced (array base names are not scalars; index variables are);
//    an unevidenced name types by its first occurrence's context.
StaticFeatures analyze_statement(const LoopAst& ast);

// Layout of the model input vector (6 selected features plus bias).
inline constexpr std::size_t kFeatureCount = 7;
inline constexpr std::size_t kBiasIndex = 0;
inline constexpr std::size_t kThreadsIndex = 1;
inline constexpr std::size_t kIterationsIndex = 2;
inline constexpr std::size_t kTotalOpsIndex = 3;
inline constexpr std::size_t kFloatOpsIndex = 4;
inline constexpr std::size_t kComparisonOpsIndex = 5;
inline constexpr std::size_t kLoopLevelIndex = 6;

inline constexpr const char* kFeatureNames[kFeatureCount] = {
    "bias",      "threads",        "iterations", "total_ops",
    "float_ops", "comparison_ops", "loop_level"};

using FeatureVector = std::array<double, kFeatureCount>;

// Raw (un-normalized) model input: [1, threads, iterations, total_ops,
// float_ops, comparison_ops, loop_level].
FeatureVector make_feature_vector(const StaticFeatures& s, const DynamicFeatures& d);

// The full 12-feature row (2 dynamic + 10 static) used by feature selection:
// [threads, iterations, total_ops, float_ops, comparison_ops, loop_level,
//  num_int_vars, num_float_vars, num_if, num_if_inner, num_calls,
//  num_calls_inner].
std::vector<double> make_full_feature_row(const StaticFeatures& s, const DynamicFeatures& d);

inline constexpr std::size_t kFullFeatureCount = 12;

}  // namespace smartexec::loop_ir
