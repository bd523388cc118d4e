#pragma once

#include <stdexcept>
#include <string>

namespace amlt {

// Front-end and engine errors. Everything user-triggerable derives from
// EngineError so the CLI can catch one type and map it to an exit code.
class EngineError : public std::runtime_error {
public:
    explicit EngineError(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public EngineError {
public:
    ParseError(int line, int col, const std::string& msg)
        : EngineError("parse error at " + std::to_string(line) + ":" + std::to_string(col) +
                      ": " + msg),
          line(line), col(col) {}
    int line;
    int col;
};

class UnboundVariable : public EngineError {
public:
    UnboundVariable(int line, int col, const std::string& name)
        : EngineError("unbound variable '" + name + "' at " + std::to_string(line) + ":" +
                      std::to_string(col)),
          line(line), col(col), name(name) {}
    int line;
    int col;
    std::string name;
};

// An expression uses an operator or form the vector backend has no lowering for.
class UnsupportedExpression : public EngineError {
public:
    explicit UnsupportedExpression(const std::string& msg) : EngineError(msg) {}
};

// No kernel shape fits the register budget, even 1 x S_w.
class NoFeasibleKernel : public EngineError {
public:
    explicit NoFeasibleKernel(const std::string& msg) : EngineError(msg) {}
};

// A name needed at execution time (dimension, array operand) has no binding.
class MissingBinding : public EngineError {
public:
    explicit MissingBinding(const std::string& name)
        : EngineError("missing binding for '" + name + "'"), name(name) {}
    std::string name;
};

class NonPositiveTime : public EngineError {
public:
    explicit NonPositiveTime(double seconds)
        : EngineError("elapsed time must be positive, got " + std::to_string(seconds)) {}
};

}  // namespace amlt
