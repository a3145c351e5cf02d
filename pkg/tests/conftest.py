import random

import pytest

from mlsac.catalog import builtin_catalog
from mlsac.engine import instantiate
from mlsac.model import FragmentKind, Metamodel, MethodModel, MigrationType
from mlsac.tailoring import (
    AddFragment,
    BindTechnique,
    EditDefinition,
    ExtendFragment,
    RemoveFragment,
    SetSequence,
    TailoringError,
    apply_action,
)

# Text samples exercising the escaping paths of every serializer.
NASTY_TEXT = [
    "plain text",
    "two\nlines",
    "tabs\tand \"quotes\"",
    "angle <brackets> & ampersand",
    "backslash \\n literal",
    "carriage\rreturn",
    "unicode: naïve café ✓",
    "",
]


@pytest.fixture(scope="session")
def catalog() -> Metamodel:
    return builtin_catalog()


def random_method(metamodel: Metamodel, rng: random.Random, idx: int = 0) -> MethodModel:
    """A reachable tailored method: instantiate with random parameters,
    then apply a random burst of edits (invalid picks are skipped)."""
    types = rng.sample(list(MigrationType), rng.randint(1, 3))
    phase_ids = [p.id for p in metamodel.phases()]
    phases = rng.sample(phase_ids, rng.randint(1, len(phase_ids)))
    method = instantiate(
        metamodel,
        f"Scenario {idx}",
        set(types),
        set(phases),
        description=rng.choice(NASTY_TEXT),
        method_id=f"scenario-{idx}",
    )
    techniques = [f.id for f in metamodel.fragments if f.kind is FragmentKind.TECHNIQUE]

    for step in range(rng.randint(0, 12)):
        members = [m.fragment for m in method.members]
        task_members = [
            fid
            for fid in members
            if (method.resolve(metamodel, fid) or None) is not None
            and method.resolve(metamodel, fid).kind is FragmentKind.TASK
        ]
        choice = rng.randrange(6)
        action = None
        if choice == 0 and task_members:
            action = ExtendFragment(
                parent=rng.choice(task_members),
                name=f"Custom step {idx}-{step}",
                definition=rng.choice(NASTY_TEXT),
            )
        elif choice == 1:
            action = AddFragment(
                name=f"Extra task {idx}-{step}",
                kind=FragmentKind.TASK,
                phase=rng.choice(sorted(method.phases)),
                definition=rng.choice(NASTY_TEXT),
            )
        elif choice == 2 and members:
            action = RemoveFragment(
                fragment=rng.choice(members),
                waiver=rng.choice([None, "not needed in this scenario"]),
            )
        elif choice == 3 and task_members:
            action = BindTechnique(
                task=rng.choice(task_members), technique=rng.choice(techniques)
            )
        elif choice == 4 and len(members) >= 2:
            edges = []
            for _ in range(rng.randint(1, 3)):
                pair = rng.sample(members, 2)
                edges.append((pair[0], pair[1]))
            action = SetSequence(edges=tuple(edges))
        elif choice == 5 and members:
            action = EditDefinition(
                fragment=rng.choice(members), definition=rng.choice(NASTY_TEXT)
            )
        if action is None:
            continue
        try:
            method = apply_action(method, metamodel, action).method
        except TailoringError:
            continue
    return method
