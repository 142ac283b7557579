// affect -- multimodal physiological emotion recognition toolkit.
//
// Subcommands: synth, preprocess, train, eval, analyze.

#include <CLI11.hpp>

#include <affect/commands.hpp>

using namespace affect;

int main(int argc, char** argv) {
  CLI::App app{"affect: liquid-network emotion recognition from physiological signals"};
  app.require_subcommand(1);

  // --- synth
  cli::SynthOptions synth;
  CLI::App* s = app.add_subcommand("synth", "Generate a synthetic multimodal dataset");
  s->add_option("--out", synth.out_dir, "Output dataset directory")->required();
  s->add_option("--per-class", synth.per_class, "Samples per emotion class")
      ->capture_default_str();
  s->add_option("--noise", synth.noise, "Noise level (0 = clean)")->capture_default_str();
  s->add_option("--seed", synth.seed, "Generator seed")->required();
  s->add_option("--subjects", synth.subjects, "Synthetic subject count")->capture_default_str();
  s->add_option("--duration", synth.duration_s, "Session length in seconds")
      ->capture_default_str();
  s->add_option("--raw-out", synth.raw_out, "Also dump raw recordings to this directory");
  s->add_flag("--quiet", synth.quiet, "Suppress progress output");

  // --- preprocess
  cli::PreprocessOptions pre;
  CLI::App* p = app.add_subcommand("preprocess", "Preprocess raw recordings into a dataset");
  p->add_option("--raw", pre.raw_dir, "Raw recordings directory")->required();
  p->add_option("--out", pre.out_dir, "Output dataset directory")->required();
  p->add_option("--seed", pre.seed, "Split seed")->capture_default_str();
  p->add_option("--split-ratio", pre.split_ratio, "Train fraction per class")
      ->capture_default_str();
  p->add_flag("--quiet", pre.quiet, "Suppress progress output");

  // --- train
  cli::TrainOptions tr;
  CLI::App* t = app.add_subcommand("train", "Train the model on a dataset");
  t->add_option("--data", tr.dataset_dir, "Dataset directory")->required();
  t->add_option("--out", tr.out_dir, "Output directory for checkpoint/history/metrics")
      ->required();
  t->add_option("--config", tr.config_file, "key=value config file (model.*, train.*)");
  t->add_option("--seed", tr.seed, "Training seed")->required();
  std::vector<std::string> modalities;
  t->add_option("--modalities", modalities,
                "Comma-separated modality subset (raw_eeg,psd,de,stats,asym,hrv,eda,hr,temp,"
                "personality)")
      ->delimiter(',');
  double lr = 5e-4;
  int batch_size = 64, epochs = 200, warmup = 15, patience = 25;
  double weight_decay = 0.01, grad_clip = 1.0, label_smoothing = 0.1, lambda0 = 0.001;
  double dropout = 0.3;
  auto* lr_opt = t->add_option("--lr", lr, "Learning rate")->capture_default_str();
  auto* bs_opt = t->add_option("--batch-size", batch_size, "Minibatch size")->capture_default_str();
  auto* ep_opt = t->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
  auto* wu_opt = t->add_option("--warmup-epochs", warmup, "Linear warmup epochs")->capture_default_str();
  auto* wd_opt = t->add_option("--weight-decay", weight_decay, "Decoupled weight decay")->capture_default_str();
  auto* gc_opt = t->add_option("--grad-clip", grad_clip, "Global gradient-norm clip")->capture_default_str();
  auto* ls_opt = t->add_option("--label-smoothing", label_smoothing, "Label smoothing epsilon")->capture_default_str();
  auto* l0_opt = t->add_option("--lambda0", lambda0, "Initial reconstruction weight")->capture_default_str();
  auto* pa_opt = t->add_option("--patience", patience, "Early-stopping patience (macro F1)")->capture_default_str();
  auto* do_opt = t->add_option("--dropout", dropout, "Dropout rate")->capture_default_str();
  t->add_flag("--quiet", tr.quiet, "Suppress progress output");

  // --- eval
  cli::EvalOptions ev;
  CLI::App* e = app.add_subcommand("eval", "Evaluate a checkpoint and emit metrics JSON");
  e->add_option("--data", ev.dataset_dir, "Dataset directory")->required();
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint archive path")->required();
  e->add_option("--model-config", ev.model_config,
                "Model config file (default: model.cfg next to the checkpoint)");
  e->add_option("--report", ev.report_path,
                "Metrics JSON path (default: metrics.json under $AFFECT_REPORT_DIR or .)");
  e->add_option("--split", ev.split, "Split to evaluate: train or test")->capture_default_str();
  e->add_flag("--quiet", ev.quiet, "Suppress progress output");

  // --- analyze
  cli::AnalyzeOptions an;
  CLI::App* a = app.add_subcommand("analyze", "Post-hoc analyses of a trained checkpoint");
  a->add_option("--data", an.dataset_dir, "Dataset directory")->required();
  a->add_option("--checkpoint", an.checkpoint, "Checkpoint archive path")->required();
  a->add_option("--model-config", an.model_config,
                "Model config file (default: model.cfg next to the checkpoint)");
  a->add_option("--which", an.which,
                "attention | dynamics | calibration | bootstrap | separability | all")
      ->capture_default_str();
  a->add_option("--out", an.out_dir, "Report directory (default: $AFFECT_REPORT_DIR or .)");
  a->add_option("--seed", an.seed, "Seed for bootstrap/clustering")->capture_default_str();
  a->add_flag("--quiet", an.quiet, "Suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  if (s->parsed()) return cli::run_command([&] { cli::cmd_synth(synth); });
  if (p->parsed()) return cli::run_command([&] { cli::cmd_preprocess(pre); });
  if (t->parsed()) {
    tr.modalities = modalities;
    if (*lr_opt) tr.overrides["train.lr"] = std::to_string(lr);
    if (*bs_opt) tr.overrides["train.batch_size"] = std::to_string(batch_size);
    if (*ep_opt) tr.overrides["train.epochs"] = std::to_string(epochs);
    if (*wu_opt) tr.overrides["train.warmup_epochs"] = std::to_string(warmup);
    if (*wd_opt) tr.overrides["train.weight_decay"] = std::to_string(weight_decay);
    if (*gc_opt) tr.overrides["train.grad_clip"] = std::to_string(grad_clip);
    if (*ls_opt) tr.overrides["train.label_smoothing"] = std::to_string(label_smoothing);
    if (*l0_opt) tr.overrides["train.lambda0"] = std::to_string(lambda0);
    if (*pa_opt) tr.overrides["train.patience"] = std::to_string(patience);
    if (*do_opt) tr.overrides["model.dropout"] = std::to_string(dropout);
    return cli::run_command([&] { cli::cmd_train(tr); });
  }
  if (e->parsed()) return cli::run_command([&] { cli::cmd_eval(ev); });
  if (a->parsed()) return cli::run_command([&] { cli::cmd_analyze(an); });
  return 1;
}
