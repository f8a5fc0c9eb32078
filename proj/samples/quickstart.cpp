// Minimal end-to-end use of the tabular runner: learn a small random MDP,
// print the certificate as it tightens, and audit every episode against
// the exact planner.

#include <certrl/certrl.hpp>

#include <cstdio>

int main() {
  using namespace certrl;

  const auto env = gen_random_tabular(/*S=*/5, /*A=*/3, /*H=*/4, /*seed=*/7);
  const double optimal = solve_exact(env).optimal_return(env);
  std::printf("optimal return: %.4f\n\n", optimal);

  OrlcRunner runner(env, OrlcParams{/*delta=*/0.1}, /*seed=*/7);
  std::vector<RunRecord> records;
  for (int episode = 1; episode <= 2000; ++episode) {
    const auto out = runner.step();
    records.push_back(audit_episode(env, out.bounds.policy, out.certificate, out.trace));
    if (episode % 400 == 0 || episode == 1)
      std::printf("episode %4d  certificate [%.4f, %.4f]  width %.4f  gap %.4f\n", episode,
                  out.certificate.lower, out.certificate.upper, out.certificate.width(),
                  records.back().gap);
  }

  const double levels[] = {2.0, 1.0};
  const auto report = aggregate(records, /*mistake_thresholds=*/levels, /*pac_levels=*/levels);
  std::printf("\nviolations: %lld gap, %lld interval\n", (long long)report.gap_violations,
              (long long)report.interval_violations);
  for (const auto& p : report.pac) {
    if (p.episode < 0)
      std::printf("no certificate narrower than %.1f yet\n", p.level);
    else
      std::printf("first certificate narrower than %.1f: episode %lld\n", p.level,
                  (long long)p.episode);
  }
  return report.gap_violations + report.interval_violations == 0 ? 0 : 1;
}
