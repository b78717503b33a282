#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"

using namespace medivista;

int main(int argc, char** argv) {
    CLI::App app{"medivista: phantom echo segmentation toolkit"};
    app.require_subcommand(1);

    PhantomArgs phantom;
    CLI::App* sp = app.add_subcommand("phantom", "generate a synthetic beating-chamber dataset");
    sp->add_option("--out", phantom.out, "output dataset directory")->required();
    sp->add_option("--count", phantom.count, "number of videos");
    sp->add_option("--seed", phantom.seed, "generator seed");
    sp->add_option("--frames", phantom.frames, "frames per video (even)");
    sp->add_option("--size", phantom.size, "frame size HxW");
    sp->add_option("--eject", phantom.eject, "mean ejection parameter in (0,1)");
    sp->add_option("--structures", phantom.structures, "2 (endo+epi) or 3 (adds la)");

    TrainArgs train;
    CLI::App* st = app.add_subcommand("train", "train on a phantom dataset");
    st->add_option("--data", train.data, "dataset directory")->required();
    st->add_option("--config", train.config, "run config JSON");
    st->add_option("--out", train.out, "output directory")->required();
    st->add_option("--set", train.overrides, "config override section.key=value");

    EvalArgs eval;
    CLI::App* se = app.add_subcommand("eval", "evaluate a checkpoint");
    se->add_option("--data", eval.data, "dataset directory")->required();
    se->add_option("--ckpt", eval.ckpt, "checkpoint directory")->required();
    se->add_option("--report", eval.report, "metrics CSV to write")->required();
    se->add_option("--split", eval.split, "dataset split (default test)");

    GradcheckArgs gc;
    CLI::App* sg = app.add_subcommand("gradcheck", "finite-difference checks for every op");
    CLI::Option* tol_opt = sg->add_option("--tol", gc.tol, "tolerance override");
    sg->add_option("--op", gc.op, "run a single op by name");
    sg->add_option("--seeds", gc.seeds, "seeds per op (default 3)");

    AblateArgs ab;
    CLI::App* sa = app.add_subcommand("ablate", "run an ablation axis end-to-end");
    sa->add_option("--axis", ab.axis, "order|kernel|rank|ffm|adapter|fusion|backbone|all")
        ->required();
    sa->add_option("--data", ab.data, "dataset directory")->required();
    sa->add_option("--out", ab.out, "output directory")->required();
    sa->add_option("--config", ab.config, "run config JSON for the per-variant recipe");
    sa->add_option("--set", ab.overrides, "config override section.key=value");
    sa->add_option("--seed", ab.seed, "shared seed for every variant");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors exit 1
    }

    try {
        if (sp->parsed()) return cmd_phantom(phantom);
        if (st->parsed()) return cmd_train(train);
        if (se->parsed()) return cmd_eval(eval);
        if (sg->parsed()) {
            gc.tol_given = tol_opt->count() > 0;
            return cmd_gradcheck(gc);
        }
        if (sa->parsed()) return cmd_ablate(ab);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
