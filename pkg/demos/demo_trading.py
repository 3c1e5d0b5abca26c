"""Walkthrough of the factor-market environment.

Replays the two-stock worked example (loading matrix [[0.1, 0.2], [-0.3, 0.4]],
prices 1 and 2, cash 100) to its known final value of about 110.42, then runs
the scripted strategies against a freshly generated market and compares their
final values to the perfect-information greedy and the no-op baseline.
"""

from latentbench import core, trading
from latentbench.baselines import NoOpTrader, OptimalTrader, TradingStrategyAgent

# --- the worked example ------------------------------------------------------

tutorial = trading.MarketConfig(
    n_stocks=2, n_factors=2,
    loading=((0.1, 0.2), (-0.3, 0.4)),
    initial_prices=(1.0, 2.0), initial_cash=100.0,
    factor_timeline=((0.10, 0.05), (-0.15, 0.10), (0.00, 0.20)),
    noise_timeline=((0.0, 0.0),) * 3,
    horizon=3, sigma=0.0,
)
task = core.TaskSpec("trading", "demo-tutorial", 0, 3, "easy", tutorial,
                     trading.rules_text_for(tutorial))
episode = core.create_episode(task)
print(core.initial_observation(episode), "\n")

for action in (
    core.TradeOrder(buy={"S0": 100}),
    core.TradeOrder(sell={"S0": 100}, buy={"S1": 51}),
    core.TradeOrder(),
):
    outcome = core.step(episode, action)
    print("->", outcome.feedback)
print("\n" + outcome.observation)

# --- strategies on a generated market ---------------------------------------


def final_value(config, agent):
    t = core.TaskSpec("trading", "demo", 1, config.horizon, "easy", config, "")
    ep = core.create_episode(t)
    obs = core.initial_observation(ep)
    while ep.running:
        obs = core.step(ep, agent.act(ep, obs)).observation
    s = ep.surface
    return trading.portfolio_value(s.portfolio, s.prices)


market = trading.generate_trading_task(seed=7, horizon=120)
print("\n120-day generated market, initial cash 100:")
for name, agent in [
    ("optimal (perfect information)", OptimalTrader()),
    ("conservative", TradingStrategyAgent("conservative")),
    ("progressive", TradingStrategyAgent("progressive")),
    ("correlation", TradingStrategyAgent("correlation")),
    ("rolling (15-day window)", TradingStrategyAgent("rolling")),
    ("ridge (lambda=1.0)", TradingStrategyAgent("ridge")),
    ("no-op", NoOpTrader()),
]:
    value = final_value(market, agent)
    print(f"  {name:32s} final value {value:9.2f}  profit {value - 100:+7.2f}%")
