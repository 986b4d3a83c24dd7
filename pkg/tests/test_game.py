import numpy as np
import pytest

from capalloc.allocations import normalized_with_without, with_without_allocation
from capalloc.game import (
    Coalition,
    GameError,
    GameInstance,
    admissible_coalitions,
    all_coalitions,
    check_allocation_properties,
    check_prop_4_2,
    coalition_values,
    gamma,
    game_allocation,
    marginal_allocation,
    marginal_contribution,
    verify_def_4_1,
)
from capalloc.measures import Entropic, Expectation, ExpectedShortfall
from capalloc.scenario import ScenarioSet
from capalloc.suitability import SATISFIED, VACUOUS, VIOLATED

ES25 = ExpectedShortfall(0.25)
E = Expectation()


@pytest.fixture
def game(game_demo):
    return GameInstance(game_demo, E, ES25)


def test_coalition_basics():
    S = Coalition([2, 0, 2])
    assert S.members == (0, 2) and S.mask == 0b101 and str(S) == "{1,3}"
    assert Coalition.from_mask(0b101) == S
    assert S.add(1).members == (0, 1, 2) and S.remove(0).members == (2,)
    assert len(all_coalitions(3)) == 7


def test_empty_coalition_and_cache(game):
    assert coalition_values(game, Coalition()) == (0.0, 0.0)
    v = game.values([0, 1])
    assert game.values(Coalition([1, 0])) is v
    with pytest.raises(GameError, match="outside"):
        game.values([5])


def test_enumeration_cap():
    with pytest.raises(GameError, match="capped at n=20"):
        all_coalitions(21)
    scn = ScenarioSet.uniform(np.ones((21, 2)) * np.array([1.0, -1.0]))
    g = GameInstance(scn, E, ES25)
    with pytest.raises(GameError, match="capped"):
        admissible_coalitions(g)
    # an explicit list is fine
    assert admissible_coalitions(g, [[0, 1]]) == []


def test_marginal_equals_with_without(game, game_demo):
    ww = with_without_allocation(ES25, game_demo).values
    for i in range(2):
        assert marginal_contribution(game, game.grand().remove(i), i) == ww[i]
    with pytest.raises(GameError, match="already in"):
        marginal_contribution(game, Coalition([0]), 0)
    assert marginal_allocation(game, Coalition([0])) == {1: marginal_contribution(game, Coalition([0]), 1)}


def test_gamma_errors():
    g = GameInstance(ScenarioSet.uniform([[1.0, 1.0], [-1.0, -1.0]]), E, ES25)
    with pytest.raises(GameError, match="zero"):
        gamma(g, [0, 1])
    g2 = GameInstance(ScenarioSet.uniform([[3.0, 3.0]]), E, ES25)
    with pytest.raises(GameError, match="differ in sign"):
        gamma(g2, [0])


def test_with_without_inefficient_and_normalized_fix(game, game_demo):
    ww = with_without_allocation(ES25, game_demo)
    rho_n = game.values(game.grand())[1]
    gap = ww.total() - rho_n
    assert abs(gap) > 1e-6
    rep = check_allocation_properties(game, ww)
    assert not rep.efficient and rep.efficiency_residual == gap
    nw = normalized_with_without(ES25, game_demo)
    rep2 = check_allocation_properties(game, nw)
    assert rep2.efficient and abs(rep2.efficiency_residual) <= 1e-9
    assert rep2.symmetry_ok


def test_dummy_player():
    # second position is riskless cash: additive cost everywhere
    scn = ScenarioSet.uniform([[-6, 2, 4, 8], [1, 1, 1, 1], [4, -6, 2, 8]])
    g = GameInstance(scn, E, ES25)
    ww = with_without_allocation(ES25, scn)
    rep = check_allocation_properties(g, ww)
    assert 1 in rep.dummies and rep.dummy_ok
    bad = ww.values.copy()
    bad[1] += 1.0
    rep = check_allocation_properties(g, bad)
    assert not rep.dummy_ok and rep.dummy_witness["i"] == 1


def _random_game(rng, theta, rho):
    n = int(rng.integers(2, 6))
    m = int(rng.integers(4, 12))
    scn = ScenarioSet.uniform(rng.normal(loc=0.5, size=(n, m)) * 3)
    return GameInstance(scn, theta, rho)


def test_marginal_contribution_suitable_for_additive_reward():
    rng = np.random.default_rng(0)
    satisfied = 0
    for _ in range(50):
        g = _random_game(rng, E, ES25)
        kappa = game_allocation(g, marginal_contribution)
        for S in admissible_coalitions(g):
            v = verify_def_4_1(g, kappa, S)
            assert v.status != VIOLATED
            satisfied += v.status == SATISFIED
            assert check_prop_4_2(g, kappa, S).status != VIOLATED
    assert satisfied > 50


def test_coalition_check_marginal_and_bad_kappa(game):
    # S = {1}: theta 2, cost 6, gamma 1/3; adding position 2 gives gamma(N) = 1
    S = Coalition([0])
    assert game.values(S) == (2.0, 6.0)
    assert marginal_contribution(game, S, 1) == -2.0
    assert verify_def_4_1(game, {1: -2.0}, S).status == SATISFIED
    # kappa > 6 makes theta({2}) / kappa_2 < gamma(S), yet gamma rises
    v = verify_def_4_1(game, {1: 10.0}, S)
    assert v.status == VIOLATED
    w = v.violations[0].witness
    assert w["gamma_S"] == pytest.approx(1 / 3) and w["gamma_S_plus_i"] == pytest.approx(1.0)
    assert w["kappa_i"] == 10.0
    # premise equality at kappa = 6
    assert verify_def_4_1(game, {1: 6.0}, S).status == VACUOUS


def test_additive_reward_check_vacuous_for_nonadditive_reward():
    from capalloc.measures import Robust

    scn = ScenarioSet.uniform([[1.0, -1.0, 2.0], [-1.0, 2.0, 1.0]])
    theta = Robust(((1.0, 1.0, 1.0), (2.0, 0.5, 0.5)))
    g = GameInstance(scn, theta, ES25)
    v = check_prop_4_2(g, {1: 0.0}, Coalition([0]))
    assert v.status == VACUOUS
    assert v.definition == "game_def_4_1"
    assert abs(v.extra["additivity_residuals"]["1"]) > 1e-9


def test_inadmissible_coalition_vacuous():
    scn = ScenarioSet.uniform([[3.0, 3.0], [1.0, -1.0]])
    g = GameInstance(scn, E, ES25)  # {1}: reward 3, cost -3 -> arbitrage
    v = verify_def_4_1(g, {1: 0.0}, Coalition([0]))
    assert v.status == VACUOUS


def test_entropic_game_runs():
    rng = np.random.default_rng(1)
    g = _random_game(rng, E, Entropic(0.5))
    for S in admissible_coalitions(g):
        verify_def_4_1(g, game_allocation(g, marginal_contribution), S)
