#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "gandalf/minig/ast.hpp"

namespace gandalf::minig {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(SourcePos pos, const std::string& message);
  SourcePos pos() const { return pos_; }
  const std::string& message() const { return message_; }

 private:
  SourcePos pos_;
  std::string message_;
};

/// Parses a mini-G translation unit. Throws SyntaxError with the position of
/// the offending token.
Program parse(std::string_view source);

}  // namespace gandalf::minig
