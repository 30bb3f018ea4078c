#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace stdadi;
  using namespace stdadi::cli;

  CLI::App app{"Dual affine differential invariant features for 3D joint trajectories"};
  app.require_subcommand(1);

  PipelineConfig pipeline;
  std::vector<std::string> inputs;
  std::string output = ".";
  bool no_squash = false;
  auto* featurize = app.add_subcommand("featurize", "append the 8 invariant channels to skeleton sequences");
  featurize->add_option("--input", inputs, "skeleton files or directories of .skeleton files")->required();
  featurize->add_option("--output", output, "output directory")->capture_default_str();
  featurize->add_option("--format", pipeline.format, "raw_f32 or csv")
      ->transform(CLI::CheckedTransformer(std::map<std::string, TensorFormat>{{"raw_f32", TensorFormat::raw_f32},
                                                                             {"csv", TensorFormat::csv}}));
  featurize->add_option("--epsilon", pipeline.epsilon, "denominator guard")->capture_default_str();
  featurize->add_flag("--no-squash", no_squash, "write raw invariants instead of tanh");
  featurize->add_option("--max-bodies", pipeline.max_bodies, "body slots per frame")->capture_default_str();
  featurize->add_option("--min-frames", pipeline.min_frames, "skip shorter sequences")->capture_default_str();
  featurize->add_option("--threads", pipeline.threads, "worker threads")->capture_default_str();
  featurize->add_option("--seed", pipeline.seed, "unused by featurize; accepted for uniform flags");
  featurize->add_flag("--skip-bad", pipeline.skip_bad, "warn and continue on unparseable files");

  VerifyConfig verify;
  double tolerance = 0.0;
  auto* verify_cmd = app.add_subcommand("verify", "check invariance under random dual affine transforms");
  verify_cmd
      ->add_option("--mode", verify.mode, "analytic, spline or negative-control")
      ->transform(CLI::CheckedTransformer(std::map<std::string, VerifyMode>{
          {"analytic", VerifyMode::analytic},
          {"spline", VerifyMode::spline},
          {"negative-control", VerifyMode::negative_control}}));
  verify_cmd->add_option("--trials", verify.trials)->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed)->capture_default_str();
  auto* tol_opt = verify_cmd->add_option("--tol", tolerance, "pass threshold (mode dependent default)");
  verify_cmd->add_option("--samples", verify.samples, "spline mode sample count")->capture_default_str();
  verify_cmd->add_option("--threads", verify.threads)->capture_default_str();
  verify_cmd
      ->add_option("--transforms", verify.transforms, "random, identity, spatial or time-scale")
      ->transform(CLI::CheckedTransformer(std::map<std::string, TransformFamily>{
          {"random", TransformFamily::random},
          {"identity", TransformFamily::identity},
          {"spatial", TransformFamily::spatial_only},
          {"time-scale", TransformFamily::time_scale_only}}));

  int max_degree = 2;
  int max_order = 4;
  auto* enumerate = app.add_subcommand("enumerate", "list canonical rational invariants");
  enumerate->add_option("--max-degree", max_degree)->capture_default_str();
  enumerate->add_option("--max-order", max_order)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  if (*featurize) {
    pipeline.inputs.assign(inputs.begin(), inputs.end());
    pipeline.output = output;
    pipeline.squash = !no_squash;
    return cmd_featurize(pipeline, std::cerr);
  }
  if (*verify_cmd) {
    if (*tol_opt) verify.tolerance = tolerance;
    return cmd_verify(verify, std::cout, std::cerr);
  }
  return cmd_enumerate(max_degree, max_order, std::cout, std::cerr);
}
