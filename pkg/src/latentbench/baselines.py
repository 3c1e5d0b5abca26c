"""Scripted agents: per-environment random baselines, a perfect-information
trader, and five learning trading strategies built on news-parsed factor
estimates.

Learning strategies only consume what a real agent sees: prices, holdings,
cash, and the news line in the observation text. The loading-matrix estimate
comes from least squares over (factor change, price change) pairs; strategies
differ in when they start trading and which window or regularization they use.
The perfect-information trader reads the stored timelines and greedily takes
the best one-day allocation, matching a brute-force one-day lookahead exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import core, repo, trading
from .energy import EnergyConfig
from .rng import RngStream
from .trading import MarketConfig, TradingState

STRATEGY_NAMES = ("optimal", "conservative", "progressive", "correlation", "rolling", "ridge", "noop")


def _news_line(observation: str) -> str | None:
    for line in observation.splitlines():
        if line.startswith("News: "):
            return line[len("News: "):]
    return None


def _cash_after_sells(
    state: TradingState, keep_index: int | None, fee_rate: float = 0.0
) -> float:
    """Cash after liquidating every position except ``keep_index``.

    Mirrors the engine's execution order (ascending stock index) so the float
    result matches a replay bit for bit.
    """
    cash = state.portfolio.cash
    for j, held in enumerate(state.portfolio.holdings):
        if j == keep_index or held <= 0:
            continue
        cash += held * state.prices[j] * (1.0 - fee_rate)
    return cash


def _affordable_shares(budget: float, price: float) -> int:
    quantity = int(budget / price)
    while quantity > 0 and quantity * price > budget:
        quantity -= 1
    return quantity


def _allin_action(state: TradingState, target: int, quantity: int) -> core.TradeOrder:
    sell = {
        f"S{j}": held
        for j, held in enumerate(state.portfolio.holdings)
        if j != target and held > 0
    }
    buy = {f"S{target}": quantity} if quantity > 0 else {}
    return core.TradeOrder(buy=buy, sell=sell)


def _liquidate_action(state: TradingState) -> core.TradeOrder:
    sell = {f"S{j}": held for j, held in enumerate(state.portfolio.holdings) if held > 0}
    return core.TradeOrder(buy={}, sell=sell)


class OptimalTrader:
    """Greedy one-day-lookahead with full knowledge of the stored timelines.

    Evaluates every single-stock all-in (and full liquidation) at tomorrow's
    realized prices and picks the highest value; holds cash when no stock has
    a positive day ahead. Ties break to the lowest stock index.
    """

    def act(self, episode: core.EpisodeState, observation: str) -> core.AgentAction:
        config: MarketConfig = episode.task.payload
        state: TradingState = episode.surface
        if state.day >= config.horizon:
            return core.TradeOrder()
        next_prices = trading.advance_market(config, state.day, state.prices)

        cash_value = _cash_after_sells(state, keep_index=None, fee_rate=config.fee_rate)
        best_index = None
        best_value = cash_value
        best_quantity = 0
        for i in range(config.n_stocks):
            cash = _cash_after_sells(state, keep_index=i, fee_rate=config.fee_rate)
            price = state.prices[i] * (1.0 + config.fee_rate)
            quantity = _affordable_shares(cash, price)
            residual = cash - quantity * price
            value = residual + (state.portfolio.holdings[i] + quantity) * next_prices[i]
            if value > best_value:
                best_value = value
                best_index = i
                best_quantity = quantity
        if best_index is None:
            return _liquidate_action(state)
        return _allin_action(state, best_index, best_quantity)


class NoOpTrader:
    def act(self, episode: core.EpisodeState, observation: str) -> core.AgentAction:
        return core.TradeOrder()


@dataclass
class EstimatorState:
    """Accumulated regression data for the learning strategies."""

    factor_rows: list[list[float]] = field(default_factory=list)
    change_rows: list[list[float]] = field(default_factory=list)
    last_prices: tuple[float, ...] | None = None
    last_news: list[float] | None = None

    def observe(self, prices: tuple[float, ...], news: list[float] | None) -> None:
        if self.last_prices is not None and self.last_news is not None:
            self.factor_rows.append(self.last_news)
            self.change_rows.append([p - q for p, q in zip(prices, self.last_prices)])
        self.last_prices = prices
        self.last_news = news

    @property
    def rows(self) -> int:
        return len(self.factor_rows)


def lstsq_loading(factor_rows: list[list[float]], change_rows: list[list[float]]) -> np.ndarray | None:
    """Full least-squares estimate of the loading matrix, or None if rank-deficient."""
    x = np.asarray(factor_rows, dtype=float)
    y = np.asarray(change_rows, dtype=float)
    if x.shape[0] < x.shape[1] or np.linalg.matrix_rank(x) < x.shape[1]:
        return None
    solution, *_ = np.linalg.lstsq(x, y, rcond=None)
    return solution.T  # d x K


def correlation_loading(factor_rows: list[list[float]], change_rows: list[list[float]]) -> np.ndarray | None:
    """Per-pair regression through the origin, assuming independent factors."""
    x = np.asarray(factor_rows, dtype=float)
    y = np.asarray(change_rows, dtype=float)
    denominators = (x * x).sum(axis=0)
    if np.any(denominators == 0.0):
        return None
    return (y.T @ x) / denominators  # d x K


def ridge_loading(
    factor_rows: list[list[float]], change_rows: list[list[float]], lam: float
) -> np.ndarray | None:
    """Ridge on scale-standardized regressors; converges to least squares as lam -> 0."""
    x = np.asarray(factor_rows, dtype=float)
    y = np.asarray(change_rows, dtype=float)
    scale = np.sqrt((x * x).mean(axis=0))
    if np.any(scale == 0.0):
        return None
    xs = x / scale
    k = x.shape[1]
    try:
        beta = np.linalg.solve(xs.T @ xs + lam * np.eye(k), xs.T @ y)
    except np.linalg.LinAlgError:
        return None
    return (beta / scale[:, None]).T  # d x K


class TradingStrategyAgent:
    """One of the five learning strategies from the scripted-baseline family.

    kind: conservative (waits num_factors + 2 observed days, full-history
    least squares), progressive (trades from the third day, full history),
    correlation (per-pair independent regressions), rolling (trailing window,
    default 15 days), ridge (penalized least squares, default lambda 1.0).
    """

    def __init__(self, kind: str, window: int = 15, ridge_lambda: float = 1.0):
        if kind not in ("conservative", "progressive", "correlation", "rolling", "ridge"):
            raise ValueError(f"unknown strategy '{kind}'")
        self.kind = kind
        self.window = window
        self.ridge_lambda = ridge_lambda
        self.state = EstimatorState()
        self.fallback_days = 0
        self.last_loading: np.ndarray | None = None
        self.last_ratios: list[float] | None = None
        self.last_choice: int | None = None

    def _start_rows(self, n_factors: int) -> int:
        if self.kind == "conservative":
            return n_factors + 2
        return 2

    def estimate(self, n_factors: int) -> np.ndarray | None:
        rows = self.state.factor_rows
        changes = self.state.change_rows
        if self.kind == "rolling":
            rows = rows[-self.window:]
            changes = changes[-self.window:]
        if self.kind == "correlation":
            return correlation_loading(rows, changes)
        if self.kind == "ridge":
            return ridge_loading(rows, changes, self.ridge_lambda)
        return lstsq_loading(rows, changes)

    def act(self, episode: core.EpisodeState, observation: str) -> core.AgentAction:
        config: MarketConfig = episode.task.payload
        state: TradingState = episode.surface
        news_line = _news_line(observation)
        news = trading.parse_news_values(news_line) if news_line else None
        self.state.observe(state.prices, news)
        self.last_ratios = None
        self.last_choice = None

        if news is None or self.state.rows < self._start_rows(config.n_factors):
            return core.TradeOrder()
        loading = self.estimate(config.n_factors)
        if loading is None:
            self.fallback_days += 1
            return core.TradeOrder()
        self.last_loading = loading

        z = np.asarray(news, dtype=float)
        predicted_change = loading @ z
        ratios = [float(predicted_change[i] / state.prices[i]) for i in range(config.n_stocks)]
        self.last_ratios = ratios
        best = max(range(config.n_stocks), key=lambda i: (ratios[i], -i))
        if ratios[best] <= 0.0:
            return _liquidate_action(state)
        self.last_choice = best
        cash = _cash_after_sells(state, keep_index=best, fee_rate=config.fee_rate)
        quantity = _affordable_shares(cash, state.prices[best] * (1.0 + config.fee_rate))
        return _allin_action(state, best, quantity)


def make_trading_agent(name: str, window: int = 15, ridge_lambda: float = 1.0):
    if name == "optimal":
        return OptimalTrader()
    if name == "noop":
        return NoOpTrader()
    return TradingStrategyAgent(name, window=window, ridge_lambda=ridge_lambda)


# ---------------------------------------------------------------------------
# Random baselines


_REPO_COMMAND_KINDS = ("tree", "list", "run_entry", "run_script", "install", "uninstall")


class RandomAgent:
    """Uniform valid actions per environment; replays identically per seed."""

    def __init__(self, seed: int):
        self.rng = RngStream(seed, "random-agent")

    def act(self, episode: core.EpisodeState, observation: str) -> core.AgentAction:
        env = episode.task.env_kind
        payload = episode.task.payload
        if env == "lights":
            return core.ToggleAction(index=self.rng.randint(0, payload.n_lights - 1))
        if env == "trading":
            return self._trading(payload)
        if env == "energy":
            return self._energy(payload, episode.surface.day)
        if env == "repo":
            return self._repo(payload)
        raise ValueError(f"unknown environment '{env}'")

    def _trading(self, config: MarketConfig) -> core.TradeOrder:
        if self.rng.random() < 0.5:
            return core.TradeOrder()
        symbol = f"S{self.rng.randint(0, config.n_stocks - 1)}"
        quantity = self.rng.randint(1, 20)
        if self.rng.random() < 0.5:
            return core.TradeOrder(buy={symbol: quantity})
        return core.TradeOrder(sell={symbol: quantity})

    def _energy(self, config: EnergyConfig, day: int) -> core.DispatchCommand:
        thermal = self.rng.uniform(0.2, 1.0) * config.capacities[0]
        wind = self.rng.uniform(0.0, 1.0) * config.capacities[1]
        solar = self.rng.uniform(0.0, 1.0) * config.capacities[2]
        battery = self.rng.uniform(-20.0, 20.0)
        cost = (
            thermal * config.unit_costs[0]
            + wind * config.unit_costs[1]
            + solar * config.unit_costs[2]
            + abs(battery) * config.unit_costs[3]
        )
        budget = config.budget_timeline[min(day, config.horizon - 1)]
        if cost > 0.95 * budget:
            scale = 0.95 * budget / cost
            thermal, wind, solar, battery = (x * scale for x in (thermal, wind, solar, battery))
        return core.DispatchCommand(thermal=thermal, wind=wind, solar=solar, battery=battery)

    def _repo(self, config: repo.RepoConfig) -> core.ShellCommand:
        kind = self.rng.choice(_REPO_COMMAND_KINDS)
        if kind == "tree":
            return core.ShellCommand(command="repo tree")
        if kind == "list":
            return core.ShellCommand(command="pip list")
        if kind == "run_entry":
            return core.ShellCommand(command=f"python {config.entry}")
        if kind == "run_script" and config.scripts:
            script = self.rng.choice(config.scripts)
            return core.ShellCommand(command=f"python {script.path}")
        name = self.rng.choice(config.packages)
        if kind == "uninstall":
            return core.ShellCommand(command=f"pip uninstall {name}")
        version = self.rng.choice(config.versions[name])
        return core.ShellCommand(command=f"pip install {name}=={version}")
