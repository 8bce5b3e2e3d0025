#include "gsnell/generator.hpp"

namespace gsnell {

Generator Generator::zero(int steps) {
    Generator g;
    g.label = "zero";
    g.form = Form::zero;
    g.bound = AdaptedProcess::constant(steps, 0.0);
    g.evaluate = [](int, int, double) { return 0.0; };
    return g;
}

Generator Generator::unit_drive(int steps) {
    Generator g;
    g.label = "unit drive";
    g.form = Form::unit_drive;
    g.bound = AdaptedProcess::constant(steps, 1.0);
    g.evaluate = [](int, int, double) { return 1.0; };
    return g;
}

}  // namespace gsnell
