"""
Неявная выборка: прямой шаг, обратный (сглаживающий) шаг и совместный шаг
для пропущенного наблюдения.

Каждый шаг отображает заранее выбранную эталонную величину xi ~ N(0, I) в новое
положение частицы, решая уравнение xi^T xi / 2 = (аргумент апостериорной плотности) - Phi
итерацией: h линеаризуется в текущем приближении, квадратичная форма приводится к
псевдо-гауссиану, а следующее приближение берется как m + L xi.
Вес частицы: log W = -Phi + log|J|.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..core.enums import JacobianMode, StepKind
from ..core.exceptions import NonConvergenceError, SingularJacobianError, UnsupportedModelError
from ..core.model import StateSpaceModel, propagate
from ..core.pseudo_gaussian import (
    PseudoGaussian,
    chol_logdet,
    complete_squares,
    merge_diagonal_gaussians,
    solve_reference,
)
from ..utils import as_vector, sup_norm


logger = logging.getLogger(__name__)


class IterationConfig(BaseModel):
    """
    Параметры итерации неявного шага.

    Attributes:
        tol: Порог сходимости по относительной sup-норме соседних приближений
        max_iters: Максимальное число решений эталонного уравнения
        jacobian_mode: Способ вычисления якобиана (None - выбрать по модели)
        fd_step: Шаг по xi для разностного якобиана
        warm_start: Начинать с X^n + F delta вместо X_0 = 0
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    tol: float = Field(1e-10, gt=0)
    max_iters: int = Field(100, ge=1)
    jacobian_mode: Optional[JacobianMode] = None
    fd_step: float = Field(1e-6, gt=0)
    warm_start: bool = False


DEFAULT_ITERATION = IterationConfig()

# Нижняя граница доли шага к update(x_j) при затухании итерации
MIN_RELAXATION = 1.0 / 64


@dataclass(frozen=True)
class StepResult:
    """
    Результат неявного шага для одной частицы.

    Attributes:
        kind: Вид шага
        new_state: Новое положение X^{n+1} (для обратного шага - X^new)
        phi: Остаток Phi на момент сходимости
        log_jac: log|det dX/dxi|
        iters: Число итераций до сходимости
        xi: Использованная эталонная выборка (для совместного шага - массив 2 x m)
        mid_state: X^n совместного шага
        pg: Псевдо-гауссиан последней итерации
        pg_mid: Псевдо-гауссиан блока X^n совместного шага
        anchors: Известные соседние состояния, от которых считался шаг
        time: Индекс шага состояния, от которого начинался шаг
    """

    kind: StepKind
    new_state: np.ndarray
    phi: float
    log_jac: float
    iters: int
    xi: np.ndarray
    mid_state: Optional[np.ndarray] = None
    pg: Optional[PseudoGaussian] = None
    pg_mid: Optional[PseudoGaussian] = None
    anchors: Tuple[np.ndarray, ...] = ()
    time: int = 0

    @property
    def log_weight_increment(self) -> float:
        return -self.phi + self.log_jac


# Функция обновления итерации: x_j -> (x_{j+1}, данные псевдо-гауссианов)
UpdateFn = Callable[[np.ndarray], Tuple[np.ndarray, tuple]]


def _fixed_point(update: UpdateFn, start: np.ndarray, cfg: IterationConfig) -> Tuple[np.ndarray, tuple, int]:
    """
    Итерирует x_{j+1} = update(x_j) до ||update(x_j) - x_j||_inf <= tol (1 + ||x_j||_inf).

    Если невязка не убывает, шаг к update(x_j) уменьшается вдвое (не меньше MIN_RELAXATION);
    шаг удваивается (до полного) только после уменьшения невязки хотя бы вдвое.
    Неподвижные точки от этого не меняются.

    Returns:
        Tuple: (x, данные последнего обновления, число итераций)
    """
    x = start
    residual = float("inf")
    relaxation = 1.0
    for solves in range(1, cfg.max_iters + 1):
        x_new, payload = update(x)
        if not np.all(np.isfinite(x_new)):
            raise NonConvergenceError(float("inf"), solves)
        previous, residual = residual, sup_norm(x_new - x)
        if residual <= cfg.tol * (1.0 + sup_norm(x)):
            return x_new, payload, max(1, solves - 1)
        if residual >= previous:
            relaxation = max(relaxation / 2, MIN_RELAXATION)
        elif residual <= previous / 2:
            relaxation = min(2 * relaxation, 1.0)
        logger.debug(f"Итерация {solves}: невязка {residual:.3e}, шаг {relaxation}")
        x = x + relaxation * (x_new - x)
    raise NonConvergenceError(residual, cfg.max_iters)


def _linearize(model: StateSpaceModel, x: np.ndarray, b: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """H_j и z_j = b - h(X_j) + H_j X_j; без наблюдения - нулевые."""
    if b is None:
        return np.zeros((model.dim_obs, model.dim_state)), np.zeros(model.dim_obs)
    H = model.obs_jacobian(x)
    return H, b - model.obs_map(x) + H @ x


def _forward_update(model: StateSpaceModel, x_prev: np.ndarray, b: np.ndarray, xi: np.ndarray, time: int) -> UpdateFn:
    prior_mean = x_prev + model.drift(x_prev, time)
    prior_cov = model.prior_cov_diag(x_prev, time)

    def update(x: np.ndarray):
        H, z = _linearize(model, x, b)
        pg = complete_squares(prior_mean, prior_cov, H, model.obs_cov_diag, z)
        return solve_reference(pg, xi), (pg,)

    return update


def _backward_update(
    model: StateSpaceModel,
    x_prevprev: np.ndarray,
    x_next: np.ndarray,
    b_mid: Optional[np.ndarray],
    xi: np.ndarray,
    time: int,
) -> UpdateFn:
    # Первое плечо X^{n-1} -> X^new известно заранее
    leg_mean = x_prevprev + model.drift(x_prevprev, time - 1)
    leg_cov = model.prior_cov_diag(x_prevprev, time - 1)

    def update(x: np.ndarray):
        # Второе плечо X^new -> X^{n+1}: F_n и G_n берутся в текущем приближении
        back_mean = x_next - model.drift(x, time)
        back_cov = model.prior_cov_diag(x, time)
        mean, cov, leg_phi = merge_diagonal_gaussians(leg_mean, leg_cov, back_mean, back_cov)
        H, z = _linearize(model, x, b_mid)
        pg = complete_squares(mean, cov, H, model.obs_cov_diag, z)
        pg = replace(pg, phi=pg.phi + leg_phi)
        return solve_reference(pg, xi), (pg,)

    return update


def _sparse_update(
    model: StateSpaceModel,
    x_prevprev: np.ndarray,
    b_next: np.ndarray,
    xi_n: np.ndarray,
    xi_np1: np.ndarray,
    time: int,
) -> UpdateFn:
    m = model.dim_state
    prev_mean = x_prevprev + model.drift(x_prevprev, time - 1)
    prev_cov = model.prior_cov_diag(x_prevprev, time - 1)

    def update(pair: np.ndarray):
        x_n, x_np1 = pair[:m], pair[m:]
        drift_n = model.drift(x_n, time)
        cov_n = model.prior_cov_diag(x_n, time)
        H, z = _linearize(model, x_np1, b_next)
        # Остаток блока X^{n+1} - гауссово "наблюдение" X^n с ковариацией K^{n+1}
        k_next = H @ np.diag(cov_n) @ H.T + np.diag(model.obs_cov_diag)
        pg_n = complete_squares(prev_mean, prev_cov, H, k_next, z - H @ drift_n)
        new_n = solve_reference(pg_n, xi_n)
        pg_np1 = complete_squares(new_n + drift_n, cov_n, H, model.obs_cov_diag, z)
        new_np1 = solve_reference(pg_np1, xi_np1)
        return np.concatenate([new_n, new_np1]), (pg_n, pg_np1)

    return update


def _start(cfg: IterationConfig, warm: np.ndarray) -> np.ndarray:
    return warm.copy() if cfg.warm_start else np.zeros_like(warm)


def resolve_jacobian_mode(model: StateSpaceModel, cfg: IterationConfig, kind: StepKind) -> JacobianMode:
    """
    Явно заданный режим или автоматический выбор.

    Линеаризованный якобиан точен, когда отображение xi -> X аффинно: линейная h и
    (для обратного и совместного шагов) F, G, не зависящие от состояния.
    """
    if cfg.jacobian_mode is not None:
        return cfg.jacobian_mode
    if model.linear_obs and (kind in (StepKind.FORWARD, StepKind.PRIOR) or model.constant_drift):
        return JacobianMode.LINEARIZED
    return JacobianMode.FINITE_DIFFERENCE


def _solver_for(model: StateSpaceModel, result: StepResult, b: Optional[np.ndarray], cfg: IterationConfig):
    """Функция xi -> X для повторных итераций от сошедшегося положения."""
    m = model.dim_state
    if result.kind == StepKind.FORWARD:
        (x_prev,) = result.anchors

        def solve(xi: np.ndarray) -> np.ndarray:
            update = _forward_update(model, x_prev, b, xi, result.time)
            return _fixed_point(update, result.new_state, cfg)[0]

        return solve
    if result.kind == StepKind.BACKWARD:
        x_prevprev, x_next = result.anchors

        def solve(xi: np.ndarray) -> np.ndarray:
            update = _backward_update(model, x_prevprev, x_next, b, xi, result.time)
            return _fixed_point(update, result.new_state, cfg)[0]

        return solve
    if result.kind == StepKind.SPARSE:
        (x_prevprev,) = result.anchors
        start = np.concatenate([result.mid_state, result.new_state])

        def solve(xi: np.ndarray) -> np.ndarray:
            update = _sparse_update(model, x_prevprev, b, xi[:m], xi[m:], result.time)
            return _fixed_point(update, start, cfg)[0]

        return solve
    raise ValueError(f"Разностный якобиан не определен для шага {result.kind}")


def jacobian_logdet(
    model: StateSpaceModel,
    result: StepResult,
    b_next: Optional[np.ndarray],
    cfg: IterationConfig = DEFAULT_ITERATION,
    mode: Optional[JacobianMode] = None,
) -> float:
    """
    log|det dX/dxi| для сошедшегося шага.

    В разностном режиме итерация повторяется от сошедшегося положения для xi + fd_step e_i,
    столбцы якобиана собираются разностями с повторным решением для xi.
    В линеаризованном режиме возвращается log det L сошедшегося псевдо-гауссиана
    (для совместного шага - сумма по блокам).

    Raises:
        SingularJacobianError: Если разностный якобиан вырожден
    """
    mode = mode or resolve_jacobian_mode(model, cfg, result.kind)
    if result.kind == StepKind.PRIOR:
        (x_prev,) = result.anchors
        return float(np.sum(np.log(model.diffusion(x_prev, result.time))))
    if mode == JacobianMode.LINEARIZED:
        total = chol_logdet(result.pg)
        if result.pg_mid is not None:
            total += chol_logdet(result.pg_mid)
        return total

    solve = _solver_for(model, result, b_next, cfg)
    xi = result.xi.reshape(-1)
    base = solve(xi)
    jac = np.empty((base.shape[0], xi.shape[0]))
    for i in range(xi.shape[0]):
        shifted = xi.copy()
        shifted[i] += cfg.fd_step
        jac[:, i] = (solve(shifted) - base) / cfg.fd_step
    sign, logdet = np.linalg.slogdet(jac)
    if sign == 0 or not np.isfinite(logdet):
        raise SingularJacobianError(f"Разностный якобиан вырожден (шаг {result.kind.value}, t={result.time})")
    return float(logdet)


def forward_step(
    model: StateSpaceModel,
    x_prev: np.ndarray,
    b_next: Optional[np.ndarray],
    xi: np.ndarray,
    cfg: IterationConfig = DEFAULT_ITERATION,
    time: int = 0,
) -> StepResult:
    """
    Прямой шаг неявного фильтра.

    Args:
        model: Модель
        x_prev: Положение частицы X^n
        b_next: Наблюдение b^{n+1} (None - наблюдения нет, выборка из переходной плотности)
        xi: Эталонная выборка N(0, I) длины m
        cfg: Параметры итерации
        time: Индекс шага n

    Returns:
        StepResult: X^{n+1}, Phi^{n+1}, log|J|

    Raises:
        NonConvergenceError: Если итерация не сошлась
    """
    x_prev = as_vector(x_prev, model.dim_state, "x_prev")
    xi = as_vector(xi, model.dim_state, "xi")
    if b_next is None:
        new_state = propagate(model, x_prev, time, xi)
        result = StepResult(
            kind=StepKind.PRIOR, new_state=new_state, phi=0.0, log_jac=0.0, iters=1, xi=xi,
            anchors=(x_prev,), time=time,
        )
        return replace(result, log_jac=jacobian_logdet(model, result, None, cfg))

    b_next = as_vector(b_next, model.dim_obs, "b_next")
    update = _forward_update(model, x_prev, b_next, xi, time)
    warm = x_prev + model.drift(x_prev, time)
    x_new, (pg,), iters = _fixed_point(update, _start(cfg, warm), cfg)
    result = StepResult(
        kind=StepKind.FORWARD, new_state=x_new, phi=pg.phi, log_jac=0.0, iters=iters, xi=xi, pg=pg,
        anchors=(x_prev,), time=time,
    )
    return replace(result, log_jac=jacobian_logdet(model, result, b_next, cfg))


def backward_step(
    model: StateSpaceModel,
    x_prevprev: np.ndarray,
    x_next: np.ndarray,
    b_mid: Optional[np.ndarray],
    xi: np.ndarray,
    cfg: IterationConfig = DEFAULT_ITERATION,
    time: int = 1,
    x_current: Optional[np.ndarray] = None,
) -> StepResult:
    """
    Обратный шаг: пересэмплирование X^n по соседям X^{n-1}, X^{n+1} и наблюдению b^n.

    Экспонента - сумма трех членов: плечо X^{n-1} -> X^new, плечо X^new -> X^{n+1}
    (F_n, G_n в текущем приближении) и наблюдение в момент n.

    Args:
        x_prevprev: X^{n-1}
        x_next: X^{n+1}
        b_mid: Наблюдение b^n (None - член наблюдения отсутствует)
        time: Индекс n пересэмплируемого состояния
        x_current: Текущее X^n (используется как начальное приближение при warm_start)
    """
    x_prevprev = as_vector(x_prevprev, model.dim_state, "x_prevprev")
    x_next = as_vector(x_next, model.dim_state, "x_next")
    xi = as_vector(xi, model.dim_state, "xi")
    if b_mid is not None:
        b_mid = as_vector(b_mid, model.dim_obs, "b_mid")
    update = _backward_update(model, x_prevprev, x_next, b_mid, xi, time)
    warm = x_current if x_current is not None else 0.5 * (x_prevprev + x_next)
    x_new, (pg,), iters = _fixed_point(update, _start(cfg, np.asarray(warm, dtype=float)), cfg)
    result = StepResult(
        kind=StepKind.BACKWARD, new_state=x_new, phi=pg.phi, log_jac=0.0, iters=iters, xi=xi, pg=pg,
        anchors=(x_prevprev, x_next), time=time,
    )
    return replace(result, log_jac=jacobian_logdet(model, result, b_mid, cfg))


def sparse_step(
    model: StateSpaceModel,
    x_prevprev: np.ndarray,
    b_next: np.ndarray,
    xi_n: np.ndarray,
    xi_np1: np.ndarray,
    cfg: IterationConfig = DEFAULT_ITERATION,
    time: int = 1,
) -> StepResult:
    """
    Совместная выборка (X^n, X^{n+1}), когда наблюдения в момент n нет, а в n+1 есть.

    На каждой итерации h линеаризуется в X_j^{n+1}, выделяется квадрат по блоку X^{n+1},
    его остаток переносится в блок X^n, затем X_{j+1}^n = m^n + L^n xi_n и
    X_{j+1}^{n+1} = m^{n+1}(X_{j+1}^n) + L^{n+1} xi_{n+1}.

    Args:
        x_prevprev: X^{n-1}
        b_next: Наблюдение b^{n+1}
        xi_n, xi_np1: Независимые эталонные выборки
        time: Индекс n промежуточного состояния

    Returns:
        StepResult: new_state = X^{n+1}, mid_state = X^n, phi = Phi^n
    """
    m = model.dim_state
    x_prevprev = as_vector(x_prevprev, m, "x_prevprev")
    b_next = as_vector(b_next, model.dim_obs, "b_next")
    xi_n = as_vector(xi_n, m, "xi_n")
    xi_np1 = as_vector(xi_np1, m, "xi_np1")
    update = _sparse_update(model, x_prevprev, b_next, xi_n, xi_np1, time)
    warm_n = x_prevprev + model.drift(x_prevprev, time - 1)
    warm = np.concatenate([warm_n, warm_n + model.drift(warm_n, time)])
    pair, (pg_n, pg_np1), iters = _fixed_point(update, _start(cfg, warm), cfg)
    result = StepResult(
        kind=StepKind.SPARSE, new_state=pair[m:], mid_state=pair[:m], phi=pg_n.phi, log_jac=0.0,
        iters=iters, xi=np.stack([xi_n, xi_np1]), pg=pg_np1, pg_mid=pg_n, anchors=(x_prevprev,), time=time,
    )
    return replace(result, log_jac=jacobian_logdet(model, result, b_next, cfg))


def posterior_exponent(
    model: StateSpaceModel,
    result: StepResult,
    b: Optional[np.ndarray],
) -> float:
    """
    Полный аргумент апостериорной плотности (со знаком минус) в сошедшейся точке шага.

    Прямой шаг - два члена, обратный - три, совместный - три члена по паре состояний.
    """

    def leg(start: np.ndarray, end: np.ndarray, time: int) -> float:
        d = end - start - model.drift(start, time)
        return float(0.5 * np.sum(d**2 / model.prior_cov_diag(start, time)))

    def obs(x: np.ndarray) -> float:
        if b is None:
            return 0.0
        r = model.obs_map(x) - b
        return float(0.5 * np.sum(r**2 / model.obs_cov_diag))

    if result.kind in (StepKind.FORWARD, StepKind.PRIOR):
        (x_prev,) = result.anchors
        return leg(x_prev, result.new_state, result.time) + obs(result.new_state)
    if result.kind == StepKind.BACKWARD:
        x_prevprev, x_next = result.anchors
        x = result.new_state
        return leg(x_prevprev, x, result.time - 1) + leg(x, x_next, result.time) + obs(x)
    (x_prevprev,) = result.anchors
    x_n, x_np1 = result.mid_state, result.new_state
    return leg(x_prevprev, x_n, result.time - 1) + leg(x_n, x_np1, result.time) + obs(x_np1)


def identity_residual(model: StateSpaceModel, result: StepResult, b: Optional[np.ndarray]) -> float:
    """|xi^T xi / 2 + Phi - полный аргумент| в сошедшейся точке (тождество Байеса)."""
    reference = 0.5 * float(np.sum(result.xi**2))
    return abs(reference + result.phi - posterior_exponent(model, result, b))


def transition_log_norm(model: StateSpaceModel, result: StepResult) -> float:
    """
    -sum log det(sqrt(delta) G) по плечам перехода, которые выбраны шагом.

    Плотность переходов содержит множитель 1 / det(sqrt(delta) G) на каждое плечо; для
    модели с шагом delta / 2 плеч два. Без этого члена приращения весов прямого шага и
    пары полушагов несопоставимы.
    """
    def leg(start: np.ndarray, time: int) -> float:
        return -float(np.sum(np.log(model.diffusion(start, time))))

    if result.kind in (StepKind.FORWARD, StepKind.PRIOR):
        (x_prev,) = result.anchors
        return leg(x_prev, result.time)
    if result.kind == StepKind.BACKWARD:
        # Множитель плеча от X^{n-1} уже учтен в весе частицы прямым шагом
        return 0.0
    (x_prevprev,) = result.anchors
    return leg(x_prevprev, result.time - 1) + leg(result.mid_state, result.time)


def normalized_log_weight(model: StateSpaceModel, result: StepResult) -> float:
    """Приращение логарифма веса с нормировкой переходной плотности."""
    return result.log_weight_increment + transition_log_norm(model, result)


def gaussian_moment_step(
    model: StateSpaceModel,
    mean: np.ndarray,
    cov: np.ndarray,
    b_next: Optional[np.ndarray],
    time: int = 0,
) -> PseudoGaussian:
    """
    Неявный шаг для гауссовой плотности линейной модели.

    Одна "частица" несет среднее и ковариацию; выделение полного квадрата выполняется с
    плотной априорной ковариацией (I + A delta) cov (I + A delta)^T + delta G G^T.
    Сходится за один шаг; m и Sigma совпадают с апостериорными моментами фильтра Калмана.

    Raises:
        UnsupportedModelError: Если у модели нет линейной части
    """
    if model.linear is None:
        raise UnsupportedModelError(f"Модель {model.name} не линейна: моментная форма неприменима")
    mean = as_vector(mean, model.dim_state, "mean")
    transition = np.eye(model.dim_state) + model.linear.drift_matrix * model.delta
    prior_mean = mean + model.drift(mean, time)
    prior_cov = transition @ np.asarray(cov, dtype=float) @ transition.T + np.diag(model.prior_cov_diag(mean, time))
    if b_next is None:
        H = np.zeros((model.dim_obs, model.dim_state))
        z = np.zeros(model.dim_obs)
    else:
        H = model.linear.obs_matrix
        z = as_vector(b_next, model.dim_obs, "b_next")
    return complete_squares(prior_mean, prior_cov, H, model.obs_cov_diag, z)
