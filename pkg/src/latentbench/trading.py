"""Multi-asset trading over a hidden linear factor market.

Daily price changes are ``W @ z_t + eps_t`` where the loading matrix ``W`` is
fixed per task and the factor/noise timelines are sampled at generation time
and stored in the task payload, so replay is deterministic. News renders each
day's factor change verbally with the numeric value in parentheses; factor
values are quantized to two decimals so the parenthetical recovers them
exactly. Orders execute sell-first, then buys in ascending stock index with
full-quantity-or-skip semantics; shares are integral.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import core
from .canonical import round9
from .rng import RngStream

SLIGHT_THRESHOLD = 0.10  # |change| below this is "slightly", at or above "significantly"


class GenerationError(RuntimeError):
    """Rejection budget exhausted while sampling a positive price path."""


def quantize2(x: float) -> float:
    return float(f"{x:.2f}")


def fmt_money(x: float) -> str:
    return f"{x:.2f}"


def fmt_price(x: float) -> str:
    text = f"{x:.4f}"
    while text.endswith("0") and not text.endswith(".00"):
        text = text[:-1]
    return text


@dataclass(frozen=True)
class MarketConfig:
    n_stocks: int
    n_factors: int
    loading: tuple[tuple[float, ...], ...]  # price-change units per factor unit
    initial_prices: tuple[float, ...]
    initial_cash: float
    factor_timeline: tuple[tuple[float, ...], ...]  # H x K
    noise_timeline: tuple[tuple[float, ...], ...]  # H x d
    horizon: int
    sparsity: float = 0.0
    sigma: float = 0.05
    fee_rate: float = 0.0  # optional proportional per-trade fee, default off
    news_noise: float = 0.0  # optional news perturbation magnitude, default off
    # pre-generated perturbed news values when news_noise > 0; None means news
    # reports the factor timeline exactly
    news_timeline: tuple[tuple[float, ...], ...] | None = None

    def news_for_day(self, day: int) -> tuple[float, ...]:
        if self.news_timeline is not None:
            return self.news_timeline[day]
        return self.factor_timeline[day]

    def symbol(self, i: int) -> str:
        return f"S{i}"

    @property
    def symbols(self) -> list[str]:
        return [f"S{i}" for i in range(self.n_stocks)]


@dataclass(frozen=True)
class Portfolio:
    cash: float
    holdings: tuple[int, ...]


@dataclass(frozen=True)
class TradingState:
    day: int
    prices: tuple[float, ...]
    portfolio: Portfolio


# ---------------------------------------------------------------------------
# Market mechanics


def advance_market(config: MarketConfig, day: int, prices: tuple[float, ...]) -> tuple[float, ...]:
    """Next-day prices from the stored factor and noise timelines."""
    if day + 1 > config.horizon:
        raise core.StateError(f"day {day} is at or beyond horizon {config.horizon}")
    z = config.factor_timeline[day]
    eps = config.noise_timeline[day]
    out = []
    for i in range(config.n_stocks):
        delta = sum(config.loading[i][k] * z[k] for k in range(config.n_factors))
        out.append(prices[i] + delta + eps[i])
    return tuple(out)


def step_trade(
    portfolio: Portfolio,
    prices: tuple[float, ...],
    action: core.TradeOrder,
    fee_rate: float = 0.0,
) -> tuple[Portfolio, list[str]]:
    """Execute sells (capped at holdings) then buys (full quantity or skip)."""
    cash = portfolio.cash
    holdings = list(portfolio.holdings)
    events: list[str] = []
    d = len(holdings)

    def index_of(sym: str) -> int | None:
        if sym.startswith("S") and sym[1:].isdigit():
            i = int(sym[1:])
            if 0 <= i < d:
                return i
        events.append(f"Unknown symbol {sym} ignored")
        return None

    for sym in sorted(action.sell, key=lambda s: (len(s), s)):
        i = index_of(sym)
        if i is None:
            continue
        requested = int(action.sell[sym])
        if requested <= 0:
            continue
        quantity = min(requested, holdings[i])
        if quantity == 0:
            events.append(f"Sell order for {sym} ignored (no shares held)")
            continue
        proceeds = quantity * prices[i] * (1.0 - fee_rate)
        holdings[i] -= quantity
        cash += proceeds
        note = f" (requested {requested}, capped to holdings)" if quantity < requested else ""
        events.append(f"Sold {quantity} {sym} at {fmt_price(prices[i])}{note}")

    for sym in sorted(action.buy, key=lambda s: (len(s), s)):
        i = index_of(sym)
        if i is None:
            continue
        quantity = int(action.buy[sym])
        if quantity <= 0:
            continue
        cost = quantity * prices[i] * (1.0 + fee_rate)
        if cost > cash:
            events.append(f"Buy order for {quantity} {sym} skipped (insufficient cash)")
            continue
        holdings[i] += quantity
        cash -= cost
        events.append(f"Bought {quantity} {sym} at {fmt_price(prices[i])}")

    if not events:
        events.append("No trades executed")
    return Portfolio(cash=cash, holdings=tuple(holdings)), events


def portfolio_value(portfolio: Portfolio, prices: tuple[float, ...]) -> float:
    return portfolio.cash + sum(q * p for q, p in zip(portfolio.holdings, prices))


def profit_rate(value: float, initial_cash: float) -> float:
    return value / initial_cash - 1.0


def render_news(z: tuple[float, ...]) -> list[str]:
    """Verbal hint per factor; the parenthetical is the exact factor change."""
    hints = []
    for k, v in enumerate(z):
        if v == 0.0:
            hints.append(f"F{k} stable (0.00)")
            continue
        direction = "rose" if v > 0 else "decreased"
        strength = "slightly" if abs(v) < SLIGHT_THRESHOLD else "significantly"
        hints.append(f"F{k} {direction} {strength} ({v:+.2f})")
    return hints


def parse_news_values(news_line: str) -> list[float]:
    """Recover the factor vector from a rendered news line."""
    values = []
    for chunk in news_line.split("|"):
        chunk = chunk.strip()
        if "(" not in chunk or not chunk.endswith(")"):
            raise ValueError(f"malformed news chunk: {chunk!r}")
        values.append(float(chunk[chunk.rindex("(") + 1 : -1]))
    return values


# ---------------------------------------------------------------------------
# Generation


def generate_trading_task(
    seed: int,
    n_stocks: int = 2,
    n_factors: int = 2,
    sparsity: float = 0.0,
    sigma: float = 0.05,
    horizon: int = 120,
    initial_cash: float = 100.0,
    price_range: tuple[float, float] = (1.0, 6.0),
    news_noise: float = 0.0,
    max_attempts: int = 500,
) -> MarketConfig:
    """Sample a market whose full stored price path stays strictly positive."""
    rng = RngStream(seed, "trading")
    for _ in range(max_attempts):
        loading = []
        for _i in range(n_stocks):
            row = [
                0.0 if rng.random() < sparsity else quantize2(rng.uniform(-0.45, 0.45))
                for _k in range(n_factors)
            ]
            # keep each stock's dominant coupling well above the noise floor,
            # otherwise windowed estimators cannot beat holding cash
            if max(abs(w) for w in row) < 0.2:
                row[rng.randint(0, n_factors - 1)] = quantize2(
                    rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 0.45)
                )
            loading.append(tuple(row))
        prices = tuple(quantize2(rng.uniform(*price_range)) for _ in range(n_stocks))
        factors = tuple(
            tuple(quantize2(rng.uniform(-0.2, 0.2)) for _ in range(n_factors))
            for _ in range(horizon)
        )
        noise = tuple(
            tuple(round9(rng.normal(0.0, sigma)) for _ in range(n_stocks))
            for _ in range(horizon)
        )
        news_timeline = None
        if news_noise > 0.0:
            news_timeline = tuple(
                tuple(quantize2(z + rng.uniform(-news_noise, news_noise)) for z in row)
                for row in factors
            )
        config = MarketConfig(
            n_stocks=n_stocks,
            n_factors=n_factors,
            loading=tuple(loading),
            initial_prices=prices,
            initial_cash=initial_cash,
            factor_timeline=factors,
            noise_timeline=noise,
            horizon=horizon,
            sparsity=sparsity,
            sigma=sigma,
            news_noise=news_noise,
            news_timeline=news_timeline,
        )
        if min_path_price(config) > 0.05:
            return config
    raise GenerationError(
        f"no strictly positive price path after {max_attempts} attempts; "
        "raise price_range or lower sigma"
    )


def min_path_price(config: MarketConfig) -> float:
    prices = config.initial_prices
    lowest = min(prices)
    for day in range(config.horizon):
        prices = advance_market(config, day, prices)
        lowest = min(lowest, min(prices))
    return lowest


def rules_text_for(config: MarketConfig) -> str:
    lines = [
        "Market dynamics: tomorrow's price of each stock equals today's price plus",
        "loading[stock] . factor_changes + noise. News reports the exact factor changes.",
        f"Noise std: {config.sigma:g}. Loading matrix rows (one per stock, columns F0..F{config.n_factors - 1}):",
    ]
    for i, row in enumerate(config.loading):
        lines.append(f"{config.symbol(i)}: [" + ", ".join(f"{w:g}" for w in row) + "]")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Engine wiring


def _validate_payload(payload) -> None:
    if not isinstance(payload, MarketConfig):
        raise core.ConfigError(f"payload: expected MarketConfig, got {type(payload).__name__}")
    d, key = payload.n_stocks, payload.n_factors
    if d < 1 or key < 1:
        raise core.ConfigError("n_stocks/n_factors: must be positive")
    if payload.horizon < 1:
        raise core.ConfigError("horizon: must be positive")
    if len(payload.loading) != d or any(len(row) != key for row in payload.loading):
        raise core.ConfigError(f"loading: expected {d}x{key} matrix")
    if len(payload.initial_prices) != d or any(p <= 0 for p in payload.initial_prices):
        raise core.ConfigError("initial_prices: need one strictly positive price per stock")
    if payload.initial_cash <= 0:
        raise core.ConfigError("initial_cash: must be positive")
    if len(payload.factor_timeline) != payload.horizon:
        raise core.ConfigError("factor_timeline: length must equal horizon")
    if len(payload.noise_timeline) != payload.horizon:
        raise core.ConfigError("noise_timeline: length must equal horizon")
    if any(len(z) != key for z in payload.factor_timeline):
        raise core.ConfigError("factor_timeline: rows must have one entry per factor")
    if any(len(e) != d for e in payload.noise_timeline):
        raise core.ConfigError("noise_timeline: rows must have one entry per stock")
    if payload.news_timeline is not None:
        if len(payload.news_timeline) != payload.horizon:
            raise core.ConfigError("news_timeline: length must equal horizon")
        if any(len(z) != key for z in payload.news_timeline):
            raise core.ConfigError("news_timeline: rows must have one entry per factor")
    if min_path_price(payload) <= 0:
        raise core.ConfigError("timelines: stored price path reaches a non-positive price")


def _initial_surface(payload: MarketConfig) -> TradingState:
    return TradingState(
        day=0,
        prices=payload.initial_prices,
        portfolio=Portfolio(cash=payload.initial_cash, holdings=(0,) * payload.n_stocks),
    )


def _transition(payload: MarketConfig, state: TradingState, action) -> tuple[TradingState, str, bool, float]:
    portfolio, events = step_trade(state.portfolio, state.prices, action, payload.fee_rate)
    next_prices = advance_market(payload, state.day, state.prices)
    new_state = TradingState(day=state.day + 1, prices=next_prices, portfolio=portfolio)
    reward = portfolio_value(portfolio, next_prices)
    feedback = "; ".join(events)
    return new_state, feedback, True, round9(reward)


def _evaluate(payload: MarketConfig, state: TradingState, step_index: int, budget: int) -> str:
    if state.day >= payload.horizon:
        return "success"
    return "running"


def _observe(payload: MarketConfig, state: TradingState) -> str:
    prices = ", ".join(
        f"{payload.symbol(i)}={fmt_price(p)}" for i, p in enumerate(state.prices)
    )
    holdings = ", ".join(
        f"{payload.symbol(i)}={q}" for i, q in enumerate(state.portfolio.holdings)
    )
    value = portfolio_value(state.portfolio, state.prices)
    if state.day >= payload.horizon:
        profit = profit_rate(value, payload.initial_cash)
        return (
            f"Trading horizon complete after {payload.horizon} days.\n"
            f"Final prices: {prices}\n"
            f"Cash: {fmt_money(state.portfolio.cash)} | Holdings: {holdings} | "
            f"Total value: {fmt_money(value)} | Profit: {profit * 100:+.2f}%"
        )
    news = " | ".join(render_news(payload.news_for_day(state.day)))
    return (
        f"Day {state.day + 1} of {payload.horizon}\n"
        f"Prices: {prices}\n"
        f"Cash: {fmt_money(state.portfolio.cash)} | Holdings: {holdings} | "
        f"Total value: {fmt_money(value)}\n"
        f"News: {news}"
    )


def _snapshot(payload: MarketConfig, state: TradingState):
    return {
        "day": state.day,
        "cash": round9(state.portfolio.cash),
        "holdings": list(state.portfolio.holdings),
        "prices": [round9(p) for p in state.prices],
    }


def _payload_to_wire(payload: MarketConfig) -> dict:
    return {
        "n_stocks": payload.n_stocks,
        "n_factors": payload.n_factors,
        "loading": [list(row) for row in payload.loading],
        "initial_prices": list(payload.initial_prices),
        "initial_cash": payload.initial_cash,
        "factor_timeline": [list(row) for row in payload.factor_timeline],
        "noise_timeline": [list(row) for row in payload.noise_timeline],
        "horizon": payload.horizon,
        "sparsity": payload.sparsity,
        "sigma": payload.sigma,
        "fee_rate": payload.fee_rate,
        "news_noise": payload.news_noise,
        "news_timeline": (
            None
            if payload.news_timeline is None
            else [list(row) for row in payload.news_timeline]
        ),
    }


def _payload_from_wire(doc: dict) -> MarketConfig:
    return MarketConfig(
        n_stocks=int(doc["n_stocks"]),
        n_factors=int(doc["n_factors"]),
        loading=tuple(tuple(float(x) for x in row) for row in doc["loading"]),
        initial_prices=tuple(float(x) for x in doc["initial_prices"]),
        initial_cash=float(doc["initial_cash"]),
        factor_timeline=tuple(tuple(float(x) for x in row) for row in doc["factor_timeline"]),
        noise_timeline=tuple(tuple(float(x) for x in row) for row in doc["noise_timeline"]),
        horizon=int(doc["horizon"]),
        sparsity=float(doc.get("sparsity", 0.0)),
        sigma=float(doc.get("sigma", 0.05)),
        fee_rate=float(doc.get("fee_rate", 0.0)),
        news_noise=float(doc.get("news_noise", 0.0)),
        news_timeline=(
            None
            if doc.get("news_timeline") is None
            else tuple(tuple(float(x) for x in row) for row in doc["news_timeline"])
        ),
    )


def _coerce_order_map(raw, label: str) -> dict[str, int]:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ValueError(f"{label} must be an object mapping symbols to share counts")
    out = {}
    for sym, qty in raw.items():
        if isinstance(qty, bool) or not isinstance(qty, (int, float)):
            raise ValueError(f"{label}[{sym}] must be a number, got {qty!r}")
        quantity = int(qty)  # fractional share requests are floored
        if quantity > 0:
            out[str(sym)] = quantity
    return out


def _parse_wire_action(payload: MarketConfig, raw) -> core.AgentAction:
    if not isinstance(raw, dict):
        return core.InvalidAction(reason="expected an object with buy/sell maps", raw=str(raw))
    try:
        buy = _coerce_order_map(raw.get("buy"), "buy")
        sell = _coerce_order_map(raw.get("sell"), "sell")
    except ValueError as exc:
        return core.InvalidAction(reason=str(exc), raw=str(raw))
    return core.TradeOrder(buy=buy, sell=sell)


core.register_env(
    core.EnvOps(
        kind="trading",
        validate_payload=_validate_payload,
        initial_surface=_initial_surface,
        transition=_transition,
        evaluate=_evaluate,
        observe=_observe,
        snapshot=_snapshot,
        payload_to_wire=_payload_to_wire,
        payload_from_wire=_payload_from_wire,
        parse_wire_action=_parse_wire_action,
    )
)
