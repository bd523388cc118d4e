#include "amlt/presets.hpp"

#include <sstream>

namespace amlt {

namespace {

struct NameParts {
    std::string base;
    std::string thres;   // tc | ti | tj | tij
    std::string orient;  // ab | atb | abt | atbt
    bool ok = false;
};

NameParts parse_name(const std::string& name) {
    NameParts p;
    std::vector<std::string> tok;
    std::size_t pos = 0;
    for (;;) {
        std::size_t dash = name.find('-', pos);
        if (dash == std::string::npos) {
            tok.push_back(name.substr(pos));
            break;
        }
        tok.push_back(name.substr(pos, dash - pos));
        pos = dash + 1;
    }
    p.base = tok[0];
    if (p.base != "matmul" && p.base != "q1" && p.base != "q2" && p.base != "q3") return p;
    p.thres = p.base == "q3" ? "tc" : "tj";
    p.orient = "ab";
    bool saw_thres = false, saw_orient = false;
    for (std::size_t t = 1; t < tok.size(); ++t) {
        const std::string& s = tok[t];
        if (s == "tc" || s == "ti" || s == "tj" || s == "tij") {
            if (saw_thres || p.base == "matmul") return p;
            p.thres = s;
            saw_thres = true;
        } else if (s == "ab" || s == "atb" || s == "abt" || s == "atbt") {
            if (saw_orient) return p;
            p.orient = s;
            saw_orient = true;
        } else {
            return p;
        }
    }
    p.ok = true;
    return p;
}

std::string build_source(const NameParts& p) {
    bool at = p.orient == "atb" || p.orient == "atbt";
    bool bt = p.orient == "abt" || p.orient == "atbt";
    std::string A = at ? "A[k][i]" : "A[i][k]";
    std::string B = bt ? "B[j][k]" : "B[k][j]";
    std::string AB = A + "*" + B;
    std::string T = p.thres == "tc"   ? "100"
                    : p.thres == "ti" ? "thres[i]"
                    : p.thres == "tj" ? "thres[j]"
                                      : "thres[i][j]";
    std::ostringstream os;
    os << "where(i in [0..M] and j in [0..N] and k in [0..K]) {\n  R[i][j] += ";
    if (p.base == "matmul")
        os << AB;
    else if (p.base == "q1")
        os << AB << " - (" << AB << " > " << T << ")*" << AB << "*dis[j]";
    else if (p.base == "q2")
        os << AB << " + (" << AB << " > " << T << ")*(" << AB << " - " << T << ")";
    else
        os << "(" << AB << " > " << T << ")";
    os << ";\n}\n";
    return os.str();
}

}  // namespace

std::optional<std::string> preset_source(const std::string& name) {
    NameParts p = parse_name(name);
    if (!p.ok) return std::nullopt;
    return build_source(p);
}

std::vector<std::string> all_preset_names() {
    std::vector<std::string> out;
    const char* orients[] = {"ab", "atb", "abt", "atbt"};
    const char* forms[] = {"tc", "ti", "tj", "tij"};
    for (const char* o : orients) out.push_back(std::string("matmul-") + o);
    for (const char* q : {"q1", "q2", "q3"})
        for (const char* f : forms)
            for (const char* o : orients)
                out.push_back(std::string(q) + "-" + f + "-" + o);
    return out;
}

}  // namespace amlt
