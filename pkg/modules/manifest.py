import json
import os
from dataclasses import dataclass, field
from typing import List

from Crypto.Hash import SHA256

from .constants import MANIFEST_SUFFIX, TOOL_VERSION, logger
from .errors import ArtifactWriteError
from .utils import get_run_timestamp


def config_digest(config_path: str) -> str:
    """SHA-256 hex digest of the config file bytes ('' without a config)"""
    if not config_path or not os.path.isfile(config_path):
        return ''
    with open(config_path, 'rb') as f:
        return SHA256.new(f.read()).hexdigest()


@dataclass
class RunManifest:
    """Reproducibility record written next to every CLI output"""
    command: str
    config_path: str
    seed: int
    output_paths: List[str] = field(default_factory=list)
    tool_version: str = TOOL_VERSION
    created_at: str = ''
    config_sha256: str = ''

    @classmethod
    def start(cls, command: str, config_path: str, seed: int, timezone: str = 'UTC') -> 'RunManifest':
        return cls(
            command=command,
            config_path=config_path or '',
            seed=seed,
            created_at=get_run_timestamp(timezone),
            config_sha256=config_digest(config_path),
        )

    def add_output(self, path: str):
        """Record a written output file"""
        self.output_paths.append(path)

    def to_dict(self) -> dict:
        """Convert manifest to dictionary"""
        return {
            'command': self.command,
            'config_path': self.config_path,
            'seed': self.seed,
            'output_paths': list(self.output_paths),
            'tool_version': self.tool_version,
            'created_at': self.created_at,
            'config_sha256': self.config_sha256,
        }

    def write(self, data_path: str) -> str:
        """Write the manifest next to `data_path` and return its path"""
        path = data_path + MANIFEST_SUFFIX
        try:
            with open(path, 'w') as f:
                json.dump(self.to_dict(), f, indent=2)
        except OSError as e:
            logger.error(f"Error saving manifest {path}: {e}")
            raise ArtifactWriteError(path, str(e)) from e
        logger.debug(f"Manifest written to {path}")
        return path
