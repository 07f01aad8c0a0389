#pragma once

#include <iosfwd>

namespace sheetaudit {

/// The sheetaudit command line: analyze, eval, checkers and serve.
///
/// analyze exits 0 when the report holds no findings, 1 when it does, and 2
/// on usage or input errors. eval exits 0 on success and 2 on input errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sheetaudit
