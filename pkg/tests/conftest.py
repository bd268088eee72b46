"""Shared fixtures: the scripted world, recorded cassettes, replay helpers.

The recorded corpus is built once per session by running every world post
against the scripted backends at parallelism 1, recording one cassette per
post.  Tests then replay those cassettes; nothing in the suite touches the
network.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pytest

from factweave.models import CorrectionResponse, PipelineConfig, Post
from factweave.pipeline import respond_to_post
from factweave.providers.cassette import Cassette, recording_backends, replay_backends
from factweave.providers.gateway import ProviderGateway

from fixture_world import World, build_world


@pytest.fixture(scope="session")
def world(tmp_path_factory) -> World:
    return build_world(tmp_path_factory.mktemp("registry"))


@dataclass
class RecordedCorpus:
    world: World
    cassette_paths: dict[str, Path]
    responses: dict[str, CorrectionResponse]
    config: PipelineConfig

    def post(self, post_id: str) -> Post:
        return next(p for p in self.world.posts if p.id == post_id)

    def replay_gateway(self, post_id: str) -> ProviderGateway:
        cassette = Cassette(self.cassette_paths[post_id])
        return ProviderGateway(replay_backends(cassette), media=self.world.media)

    def replay_run(self, post_id: str, parallelism: int = 1) -> CorrectionResponse:
        post = self.post(post_id)
        return respond_to_post(
            self.replay_gateway(post_id),
            self.world.registry,
            self.config.with_parallelism(parallelism),
            post,
            self.world.gate_for(post),
        )


@pytest.fixture(scope="session")
def recorded(world: World, tmp_path_factory) -> RecordedCorpus:
    root = tmp_path_factory.mktemp("cassettes")
    config = world.config.with_parallelism(1)
    paths: dict[str, Path] = {}
    responses: dict[str, CorrectionResponse] = {}
    for post in world.posts:
        path = root / f"{post.id}.jsonl"
        gateway = ProviderGateway(
            recording_backends(world.backends, Cassette(path)), media=world.media
        )
        responses[post.id] = respond_to_post(
            gateway, world.registry, config, post, world.gate_for(post)
        )
        paths[post.id] = path
    return RecordedCorpus(
        world=world, cassette_paths=paths, responses=responses, config=config
    )
