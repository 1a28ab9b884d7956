#pragma once

#include <stdexcept>
#include <string>

namespace cocite {

// Error taxonomy maps onto the CLI exit codes:
//   config_error    -> 1 (usage / configuration)
//   parse_error,
//   integrity_error,
//   data_error      -> 2 (bad input data)
//   resource_error  -> 3 (disk, spill space, worker failure)
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

class config_error : public error {
public:
    explicit config_error(const std::string& msg) : error(msg) {}
};

class parse_error : public error {
public:
    parse_error(const std::string& msg, std::size_t line)
        : error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    explicit parse_error(const std::string& msg) : error(msg), line_(0) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class integrity_error : public error {
public:
    explicit integrity_error(const std::string& msg) : error(msg) {}
};

class data_error : public error {
public:
    explicit data_error(const std::string& msg) : error(msg) {}
};

class resource_error : public error {
public:
    explicit resource_error(const std::string& msg) : error(msg) {}
};

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const config_error*>(&e)) return 1;
    if (dynamic_cast<const resource_error*>(&e)) return 3;
    if (dynamic_cast<const error*>(&e)) return 2;
    return 2;
}

} // namespace cocite
