import time

import pytest

from cleantable.scenario import (
    ACTIONS,
    FAILED,
    INITIAL_STATES,
    Action,
    GobletPlace,
    HandObject,
    Location,
    SideCondition,
    WorldState,
    enumerate_states,
    initial_state,
    is_final,
    mirror_action,
    optimal_policy,
    oracle_episode_length,
    state_index,
    step,
)

DD = SideCondition(False, False)
CC = SideCondition(True, True)


def ws(hand, pos, goblet, sides):
    return WorldState(hand, pos, goblet, sides)


class TestStep:
    def test_grasp_sponge_at_home(self):
        s = initial_state(Location.RIGHT)
        out = step(s, Action.GRASP)
        assert out.next_state == ws(HandObject.SPONGE, Location.HOME, GobletPlace.RIGHT, DD)
        assert out.reward == -0.01 and not out.done

    def test_wipe_under_goblet_fails(self):
        s = ws(HandObject.SPONGE, Location.RIGHT, GobletPlace.RIGHT, DD)
        out = step(s, Action.WIPE)
        assert out.failed and out.reward == -1.0 and out.done

    @pytest.mark.parametrize("goblet", [GobletPlace.LEFT, GobletPlace.RIGHT])
    def test_place_sponge_home_when_clean_finishes(self, goblet):
        s = ws(HandObject.SPONGE, Location.HOME, goblet, CC)
        out = step(s, Action.PLACE)
        assert out.done and not out.failed and out.reward == 1.0
        assert is_final(out.next_state)

    def test_done_transitions_match_brute_force(self):
        # independent oracle: exhaustively list (state, action) pairs whose
        # successor satisfies the final-state predicate
        for s in enumerate_states():
            if is_final(s):
                continue
            for a in ACTIONS:
                out = step(s, a)
                expected_done = (
                    s.hand_object is HandObject.SPONGE
                    and s.hand_position is Location.HOME
                    and s.sides == CC
                    and a is Action.PLACE
                )
                assert (out.done and not out.failed) == expected_done

    def test_determinism(self):
        for s in enumerate_states():
            for a in ACTIONS:
                assert step(s, a) == step(s, a)

    def test_reward_closure(self):
        for s in enumerate_states():
            for a in ACTIONS:
                out = step(s, a)
                assert out.reward in (1.0, -1.0, -0.01)
                if out.failed:
                    assert out.reward == -1.0 and out.done
                elif out.done:
                    assert out.reward == 1.0 and is_final(out.next_state)
                else:
                    assert out.reward == -0.01

    def test_mirror_symmetry(self):
        for s in enumerate_states():
            for a in ACTIONS:
                out = step(s, a)
                mirrored = step(s.mirrored(), mirror_action(a))
                assert mirrored.reward == out.reward
                assert mirrored.done == out.done
                if out.failed:
                    assert mirrored.failed
                else:
                    assert mirrored.next_state == out.next_state.mirrored()

    def test_goblet_conservation(self):
        for s in enumerate_states():
            assert s.is_consistent()
            for a in ACTIONS:
                out = step(s, a)
                if not out.failed:
                    assert out.next_state.is_consistent()

    def test_abort_resets_to_an_initial_configuration(self):
        stuck = ws(HandObject.GOBLET, Location.HOME, GobletPlace.IN_HAND, DD)
        for s in enumerate_states():
            if is_final(s):
                continue
            out = step(s, Action.ABORT)
            assert not out.done and out.reward == -0.01
            n = out.next_state
            if s.goblet_position is GobletPlace.IN_HAND and s.hand_position is Location.HOME:
                # nowhere at home to set the goblet down: everything else resets
                assert n == stuck
            else:
                assert n in INITIAL_STATES

    def test_inconsistent_state_rejected(self):
        bad = ws(HandObject.FREE, Location.HOME, GobletPlace.IN_HAND, DD)
        with pytest.raises(ValueError):
            step(bad, Action.GRASP)


class TestIsFinal:
    def test_final_states(self):
        assert is_final(ws(HandObject.FREE, Location.HOME, GobletPlace.LEFT, CC))
        assert not is_final(ws(HandObject.FREE, Location.HOME, GobletPlace.RIGHT, SideCondition(True, False)))
        assert not is_final(ws(HandObject.SPONGE, Location.HOME, GobletPlace.LEFT, CC))


class TestEnumeration:
    def test_two_initial_states(self):
        assert len(INITIAL_STATES) == 2
        assert INITIAL_STATES[0] == enumerate_states()[0]
        assert INITIAL_STATES[1] == enumerate_states()[1]

    def test_count_matches_reported_size(self):
        t0 = time.perf_counter()
        states = enumerate_states()
        assert time.perf_counter() - t0 < 1.0
        assert len(states) == 53

    def test_step_defined_everywhere(self):
        for s in enumerate_states():
            for a in ACTIONS:
                step(s, a)

    def test_indices_stable(self):
        states = enumerate_states()
        idx = state_index()
        assert all(idx[s] == i for i, s in enumerate(states))

    def test_no_duplicates_and_reachability(self):
        states = enumerate_states()
        assert len(set(states)) == len(states)
        assert any(is_final(s) for s in states)


class TestInitialState:
    def test_left_right(self):
        assert initial_state(Location.LEFT).token() == "free|home|left|DD"
        assert initial_state(Location.RIGHT).token() == "free|home|right|DD"

    def test_home_rejected(self):
        with pytest.raises(ValueError):
            initial_state(Location.HOME)


class TestOraclePolicy:
    def test_first_move_is_grasp(self):
        policy = optimal_policy()
        assert policy[INITIAL_STATES[0]] is Action.GRASP
        assert policy[INITIAL_STATES[1]] is Action.GRASP

    @pytest.mark.parametrize("goblet", [GobletPlace.LEFT, GobletPlace.RIGHT])
    def test_one_step_from_done(self, goblet):
        s = ws(HandObject.SPONGE, Location.HOME, goblet, CC)
        assert optimal_policy()[s] is Action.PLACE

    def test_episode_length_symmetric(self):
        left = oracle_episode_length(INITIAL_STATES[0])
        right = oracle_episode_length(INITIAL_STATES[1])
        assert left == right == 15

    def test_oracle_never_fails(self):
        policy = optimal_policy()
        for start in INITIAL_STATES:
            s = start
            for _ in range(100):
                out = step(s, policy[s])
                assert not out.failed
                if out.done:
                    break
                s = out.next_state
            else:
                pytest.fail("oracle did not finish")


class TestSerialization:
    def test_token_round_trip(self):
        for s in enumerate_states():
            assert WorldState.from_token(s.token()) == s

    def test_code_round_trip(self):
        for s in enumerate_states():
            code = s.code()
            assert len(code) == 13 and sum(code) == 4
            assert WorldState.from_code(code) == s

    def test_bad_tokens(self):
        with pytest.raises(ValueError):
            WorldState.from_token("free|home|right")
        with pytest.raises(ValueError):
            SideCondition.from_token("XY")

    def test_total_order(self):
        states = sorted(enumerate_states())
        assert len(states) == 53
        assert all(not (b < a) for a, b in zip(states, states[1:]))
