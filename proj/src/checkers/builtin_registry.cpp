#include "sheetaudit/checkers.hpp"

namespace sheetaudit::checkers {

void register_builtin_checkers(CheckerRegistry& registry) {
    registry.add(make_blank_checker());
    registry.add(make_constants_checker());
    registry.add(make_consistency_checker());
    registry.add(make_direction_checker());
    registry.add(make_protection_checker());
}

}  // namespace sheetaudit::checkers

namespace sheetaudit {

const CheckerRegistry& builtin_registry() {
    static const CheckerRegistry registry = [] {
        CheckerRegistry r;
        checkers::register_builtin_checkers(r);
        return r;
    }();
    return registry;
}

}  // namespace sheetaudit
