#!/usr/bin/env python3
"""
Configuration Manager for ConRelMiner
Merges defaults, bundled profiles, config files, environment variables and
command-line overrides, and validates the result into a RunConfig
"""

import copy
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

import yaml

from constraint_filter import SignalLexicon
from corpus_ingest import FragmentationRules
from errors import ConfigurationError
from relation_miner import Scope, Thresholds
from text_normalize import load_stopwords
from topic_grouping import GroupSpec

APP_DIR = Path(__file__).parent
CONFIG_DIR = APP_DIR / 'config'
PROFILE_DIR = APP_DIR / 'profiles'


@dataclass(frozen=True)
class InputSpec:
    """One input document"""
    path: str
    doc_id: str
    baseline: bool = False


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration of one pipeline run"""
    inputs: Tuple[InputSpec, ...]
    fragmentation: FragmentationRules
    abbreviations: FrozenSet[str]
    min_sentence_tokens: int
    lossy: bool
    http_timeout: float
    stopword_path: Path
    stopwords: FrozenSet[str]
    lexicon: SignalLexicon
    grouping: GroupSpec
    thresholds: Thresholds
    scope: str
    selections: Tuple[Tuple[str, Tuple[str, ...]], ...]
    include_undefined_rows: bool
    output_dir: Path
    basename: str
    log_level: str = "INFO"
    log_dir: Optional[Path] = None
    profile: Optional[str] = None

    @property
    def baseline_docs(self) -> FrozenSet[str]:
        return frozenset(spec.doc_id for spec in self.inputs if spec.baseline)


def merge_configs(default: Dict, user: Dict) -> Dict:
    """Recursively merge user config with defaults"""
    result = copy.deepcopy(default)
    for key, value in user.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = merge_configs(result[key], value)
        else:
            result[key] = value
    return result


class ConfigManager:
    """Manages run configuration"""

    def __init__(self, config_file: Optional[str] = None, profile: Optional[str] = None,
                 overrides: Optional[Dict[str, Any]] = None):
        self.logger = logging.getLogger(__name__)
        self.config_file = Path(config_file) if config_file else None
        self.profile = profile or os.getenv('CONREL_PROFILE') or None
        self.overrides = overrides or {}
        self.default_config_file = CONFIG_DIR / 'default_config.yaml'

    def load_config(self) -> Dict[str, Any]:
        """Load configuration from defaults, profile, file, environment and overrides"""
        config = self._load_default_config()

        if self.profile:
            config = merge_configs(config, self._load_profile(self.profile))
            self.logger.info(f"Applied profile {self.profile}")

        if self.config_file:
            config = merge_configs(config, self._read_file(self.config_file))
            self.logger.info(f"Loaded configuration from {self.config_file}")

        config = self._apply_environment_overrides(config)
        return merge_configs(config, self.overrides)

    def build_run_config(self) -> RunConfig:
        """Load and validate; raises ConfigurationError before any document is read"""
        config = self.load_config()
        try:
            return self._validate_config(config)
        except (TypeError, ValueError) as e:
            error = ConfigurationError(f"invalid configuration value ({e})")
            self.logger.error(f"Invalid configuration: {error}")
            raise error from e
        except ConfigurationError as e:
            self.logger.error(f"Invalid configuration: {e}")
            raise

    def _load_default_config(self) -> Dict[str, Any]:
        """Load default configuration"""
        with open(self.default_config_file, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f) or {}

    def _load_profile(self, name: str) -> Dict[str, Any]:
        profile_file = PROFILE_DIR / f"{name}.json"
        if not profile_file.exists():
            available = sorted(path.stem for path in PROFILE_DIR.glob('*.json'))
            raise ConfigurationError(f"unknown profile (available: {', '.join(available)})", name)
        return self._read_file(profile_file)

    def _read_file(self, path: Path) -> Dict[str, Any]:
        if not path.exists():
            raise ConfigurationError("configuration file not found", str(path))
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f) if path.suffix.lower() == '.json' else yaml.safe_load(f)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ConfigurationError(f"unparseable configuration ({e})", str(path))
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigurationError("configuration must be a mapping", str(path))
        return data

    def _apply_environment_overrides(self, config: Dict[str, Any]) -> Dict[str, Any]:
        """Apply environment variable overrides to configuration"""
        env_mappings = {
            'CONREL_OUTPUT_DIR': (('output', 'directory'), str),
            'CONREL_LOG_LEVEL': (('logging', 'level'), str),
            'LOG_DIR': (('logging', 'directory'), str),
            'CONREL_STOPWORDS': (('normalize', 'stopwords_path'), str),
            'CONREL_LOSSY': (('ingest', 'lossy'), self._str_to_bool),
            'CONREL_GROUPING_METHOD': (('grouping', 'method'), str),
            'CONREL_TF_K': (('grouping', 'k'), int),
            'CONREL_SCOPE': (('relations', 'scope'), str),
            'CONREL_THETA_REDUNDANT': (('relations', 'thresholds', 'theta_redundant'), float),
            'CONREL_THETA_SUBSUMED': (('relations', 'thresholds', 'theta_subsumed'), float),
            'CONREL_THETA_CONFLICT': (('relations', 'thresholds', 'theta_conflict'), float),
            'CONREL_CONTAINMENT_MIN': (('relations', 'thresholds', 'containment_min'), float),
        }

        for env_var, (keys, converter) in env_mappings.items():
            env_value = os.getenv(env_var)
            if env_value is None:
                continue
            try:
                value = converter(env_value)
            except ValueError:
                self.logger.warning(f"Invalid value for {env_var}: {env_value}")
                continue

            section = config
            for key in keys[:-1]:
                section = section.setdefault(key, {})
            section[keys[-1]] = value
            self.logger.debug(f"Applied environment override: {env_var}={env_value}")

        return config

    def _str_to_bool(self, value: str) -> bool:
        """Convert string to boolean"""
        return value.lower() in ('true', '1', 'yes', 'on', 'enabled')

    def _resolve_stopwords(self, value: str) -> Path:
        path = Path(value)
        if path.is_absolute() or path.exists():
            return path
        bundled = CONFIG_DIR / path
        if bundled.exists():
            return bundled
        raise ConfigurationError("stopword list not found", value)

    def _parse_inputs(self, entries: List[Any]) -> Tuple[InputSpec, ...]:
        inputs = []
        for entry in entries or []:
            if isinstance(entry, str):
                entry = {'path': entry}
            if not isinstance(entry, dict) or not entry.get('path'):
                raise ConfigurationError("input entries need a path", entry)
            path = str(entry['path'])
            doc_id = str(entry.get('doc_id') or Path(path.rstrip('/')).stem)
            if not doc_id or ':' in doc_id:
                raise ConfigurationError("doc_id must be non-empty and free of ':'", doc_id)
            if not path.startswith(('http://', 'https://')) and not Path(path).is_file():
                raise ConfigurationError("input file not found", path)
            inputs.append(InputSpec(path, doc_id, bool(entry.get('baseline', False))))

        doc_ids = [spec.doc_id for spec in inputs]
        duplicates = sorted({doc_id for doc_id in doc_ids if doc_ids.count(doc_id) > 1})
        if duplicates:
            raise ConfigurationError("duplicate doc_id", ", ".join(duplicates))
        return tuple(inputs)

    def _validate_config(self, config: Dict[str, Any]) -> RunConfig:
        """Validate the merged configuration into a RunConfig"""
        ingest = config.get('ingest', {})
        signals = config.get('signals', {})
        grouping = config.get('grouping', {})
        relations = config.get('relations', {})
        report = config.get('report', {})
        output = config.get('output', {})
        logging_config = config.get('logging', {})

        fragmentation = ingest.get('fragmentation', {})
        rules = FragmentationRules(
            markers=list(fragmentation.get('markers') or []),
            blank_line_paragraphs=bool(fragmentation.get('blank_line_paragraphs', True)),
        )

        abbreviations = frozenset(ingest.get('abbreviations') or [])
        malformed = sorted(entry for entry in abbreviations if not entry.endswith('.'))
        if malformed:
            raise ConfigurationError("abbreviations must end with '.'", ", ".join(malformed))

        min_tokens = int(ingest.get('min_sentence_tokens', 2))
        if min_tokens < 1:
            raise ConfigurationError("min_sentence_tokens must be >= 1", min_tokens)

        stopword_path = self._resolve_stopwords(str(config.get('normalize', {}).get('stopwords_path',
                                                                                     'stopwords.txt')))
        stopwords = frozenset(load_stopwords(stopword_path))

        lexicon = SignalLexicon(
            signals=[str(phrase) for phrase in signals.get('phrases') or []],
            negators=[str(word).lower() for word in signals.get('negators') or []],
            window=int(signals.get('window', 3)),
        )
        lexicon.validate(stopwords)

        keyword_groups = []
        for entry in grouping.get('keyword_groups') or []:
            if not isinstance(entry, dict) or not entry.get('name'):
                raise ConfigurationError("keyword groups need a name", entry)
            keyword_groups.append((str(entry['name']), [str(phrase) for phrase in entry.get('phrases') or []]))
        k = grouping.get('k')
        group_spec = GroupSpec(
            method=str(grouping.get('method', 'term_frequency')),
            keyword_groups=keyword_groups,
            k=int(k) if k is not None else None,
        )

        try:
            thresholds = Thresholds(**{key: float(value) for key, value in
                                       (relations.get('thresholds') or {}).items()})
        except TypeError as e:
            raise ConfigurationError(f"unknown threshold ({e})", relations.get('thresholds'))

        scope = str(relations.get('scope', Scope.ALL_PAIRS))
        if scope not in Scope.ALL:
            raise ConfigurationError("unknown relation scope", scope)

        selections = []
        for entry in report.get('selections') or []:
            if not isinstance(entry, dict) or not entry.get('name') or not entry.get('groups'):
                raise ConfigurationError("selections need a name and groups", entry)
            selections.append((str(entry['name']), tuple(str(group) for group in entry['groups'])))

        inputs = self._parse_inputs(config.get('inputs') or [])
        if scope == Scope.AGAINST_BASELINE and not any(spec.baseline for spec in inputs) and inputs:
            raise ConfigurationError("scope against_baseline needs at least one baseline input", scope)

        log_dir = logging_config.get('directory')
        return RunConfig(
            inputs=inputs,
            fragmentation=rules,
            abbreviations=abbreviations,
            min_sentence_tokens=min_tokens,
            lossy=bool(ingest.get('lossy', False)),
            http_timeout=float(ingest.get('http_timeout', 30)),
            stopword_path=stopword_path,
            stopwords=stopwords,
            lexicon=lexicon,
            grouping=group_spec,
            thresholds=thresholds,
            scope=scope,
            selections=tuple(selections),
            include_undefined_rows=bool(report.get('include_undefined_rows', True)),
            output_dir=Path(output.get('directory', 'output')),
            basename=str(output.get('basename', 'constraints')),
            log_level=str(logging_config.get('level', 'INFO')).upper(),
            log_dir=Path(log_dir) if log_dir else None,
            profile=self.profile,
        )
