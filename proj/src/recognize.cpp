#include "amlt/recognize.hpp"

#include <map>
#include <optional>
#include <sstream>

namespace amlt {

const char* leaf_class_name(LeafClass c) {
    switch (c) {
        case LeafClass::Constant: return "Constant";
        case LeafClass::VecI: return "VecI";
        case LeafClass::VecJ: return "VecJ";
        case LeafClass::MatIJ: return "MatIJ";
    }
    return "?";
}

namespace {

// Index pattern of one array reference, expressed in i/j/k roles.
// Only subscripts that are bare loop variables participate in recognition.
struct RefPattern {
    std::string name;
    std::vector<char> axes;  // 'i', 'j', 'k' per subscript
};

// Returns the loop-variable role of a subscript expression, or nullopt when it
// is not a bare loop variable.
std::optional<char> subscript_role(const Ast& ast, NodeId id, const std::string& vi,
                                   const std::string& vj, const std::string& vk) {
    const AstNode& n = ast.at(id);
    if (n.kind != NodeKind::Ref || !n.indices.empty()) return std::nullopt;
    if (n.name == vi) return 'i';
    if (n.name == vj) return 'j';
    if (n.name == vk) return 'k';
    return std::nullopt;
}

struct RhsScan {
    // name -> axes string ("ik", "j", "", ...) for every array/scalar leaf
    std::map<std::string, std::string> patterns;
    std::vector<std::string> order;  // first-appearance order
    std::optional<NotMmlt> error;
};

void scan_rhs(const TaskSpec& task, NodeId id, const std::string& vi, const std::string& vj,
              const std::string& vk, RhsScan& out) {
    if (out.error) return;
    const AstNode& n = task.ast.at(id);
    switch (n.kind) {
        case NodeKind::Number:
            return;
        case NodeKind::Ref: {
            std::string axes;
            for (NodeId idx : n.indices) {
                auto role = subscript_role(task.ast, idx, vi, vj, vk);
                if (!role) {
                    out.error = NotMmlt{4, "subscript of '" + n.name +
                                               "' is not a bare loop variable"};
                    return;
                }
                axes.push_back(*role);
            }
            auto it = out.patterns.find(n.name);
            if (it == out.patterns.end()) {
                out.patterns.emplace(n.name, axes);
                out.order.push_back(n.name);
            } else if (it->second != axes) {
                out.error = NotMmlt{4, "'" + n.name +
                                           "' is indexed inconsistently across occurrences"};
            }
            return;
        }
        case NodeKind::Binary:
            scan_rhs(task, n.lhs, vi, vj, vk, out);
            scan_rhs(task, n.rhs, vi, vj, vk, out);
            return;
    }
}

}  // namespace

Recognition recognize(const TaskSpec& task) {
    // Condition 1, a single assignment or increment, is enforced by the
    // grammar; a TaskSpec always carries exactly one statement.

    if (task.loop_vars.size() != 3)
        return NotMmlt{2, "expected 3 loop variables, found " +
                              std::to_string(task.loop_vars.size())};

    // Condition 3: target R[i][j] with two distinct loop variables.
    const AstNode& target = task.ast.at(task.statement.target);
    if (target.indices.size() != 2)
        return NotMmlt{3, "target '" + target.name + "' is not a 2-D array"};
    std::string vi, vj;
    for (int s = 0; s < 2; ++s) {
        const AstNode& idx = task.ast.at(target.indices[static_cast<size_t>(s)]);
        bool is_var = idx.kind == NodeKind::Ref && idx.indices.empty();
        std::string name = is_var ? idx.name : "";
        bool is_loop_var = false;
        if (is_var)
            for (const auto& lv : task.loop_vars)
                if (lv.name == name) is_loop_var = true;
        if (!is_loop_var)
            return NotMmlt{3, "target subscript is not a bare loop variable"};
        (s == 0 ? vi : vj) = name;
    }
    if (vi == vj)
        return NotMmlt{3, "target uses the same loop variable twice"};

    std::string vk;
    for (const auto& lv : task.loop_vars)
        if (lv.name != vi && lv.name != vj) vk = lv.name;

    // Condition 4: scan the right-hand side leaves.
    RhsScan scan;
    scan_rhs(task, task.statement.rhs, vi, vj, vk, scan);
    if (scan.error) return *scan.error;

    Mmlt m;
    m.result = target.name;
    m.var_i = vi;
    m.var_j = vj;
    m.var_k = vk;
    for (size_t p = 0; p < task.loop_vars.size(); ++p) {
        const std::string& name = task.loop_vars[p].name;
        if (name == vi) m.loop_i = static_cast<int>(p);
        if (name == vj) m.loop_j = static_cast<int>(p);
        if (name == vk) m.loop_k = static_cast<int>(p);
    }

    for (const std::string& name : scan.order) {
        const std::string& axes = scan.patterns[name];
        if (name == m.result)
            return NotMmlt{4, "result array '" + name + "' also appears on the right-hand side"};
        if (axes == "ik" || axes == "ki") {
            if (!m.a.empty())
                return NotMmlt{4, "more than one array indexed by (i,k): '" + m.a + "' and '" +
                                      name + "'"};
            m.a = name;
            m.layout_a = axes == "ik" ? OperandLayout::Normal : OperandLayout::Transposed;
        } else if (axes == "kj" || axes == "jk") {
            if (!m.b.empty())
                return NotMmlt{4, "more than one array indexed by (k,j): '" + m.b + "' and '" +
                                      name + "'"};
            m.b = name;
            m.layout_b = axes == "kj" ? OperandLayout::Normal : OperandLayout::Transposed;
        } else if (axes.empty()) {
            m.aux.push_back({name, LeafClass::Constant});
        } else if (axes == "i") {
            m.aux.push_back({name, LeafClass::VecI});
        } else if (axes == "j") {
            m.aux.push_back({name, LeafClass::VecJ});
        } else if (axes == "ij") {
            m.aux.push_back({name, LeafClass::MatIJ});
        } else {
            // Covers k-indexed leaves ("k", "ji", "kk", ...): nothing in the
            // kernel's i/j blocking can hold them at a fixed register cost.
            return NotMmlt{4, "'" + name + "' has unsupported index pattern (" + axes + ")"};
        }
    }
    if (m.a.empty() || m.b.empty())
        return NotMmlt{4, "right-hand side does not index a pair of (i,k)/(k,j) arrays"};
    return m;
}

std::string describe(const Recognition& r) {
    std::ostringstream os;
    if (const auto* m = std::get_if<Mmlt>(&r)) {
        os << "MMLT: " << m->result << "[" << m->var_i << "][" << m->var_j << "]"
           << "  a=" << m->a << (m->layout_a == OperandLayout::Transposed ? " (transposed)" : "")
           << "  b=" << m->b << (m->layout_b == OperandLayout::Transposed ? " (transposed)" : "");
        if (!m->aux.empty()) {
            os << "  aux:";
            for (const auto& x : m->aux) os << " " << x.name << ":" << leaf_class_name(x.cls);
        }
    } else {
        const auto& n = std::get<NotMmlt>(r);
        os << "not an MMLT (condition " << n.failed_condition << "): " << n.detail;
    }
    return os.str();
}

}  // namespace amlt
