import logging

from django.core.management.base import BaseCommand, CommandError

from pants_orbits.config import RunConfig, load_run_config
from pants_orbits.exceptions import PantsError

logger = logging.getLogger('pants_orbits')

RUN_FLAGS = ('tol', 'd0', 'horizon', 'grid', 'eps', 'out', 'workers', 'seed')


class PantsCommand(BaseCommand):
    """
    Base for the project's commands: shared run-configuration flags and
    translation of PantsError into CommandError (nonzero exit, one-line message).
    """

    def add_arguments(self, parser):
        group = parser.add_argument_group('run configuration')
        group.add_argument('--config', dest='config_file', help='Key-value config file (overridden by flags)')
        group.add_argument('--tol', type=float, help='Integrator tolerance')
        group.add_argument('--d0', type=float, help='Launch depth')
        group.add_argument('--horizon', type=float, help='Reduced-length horizon')
        group.add_argument('--grid', type=int, help='Launch grid size')
        group.add_argument('--eps', type=float, help='Winding perturbation size')
        group.add_argument('--out', help='Output directory')
        group.add_argument('--workers', type=int, help='Worker processes')
        group.add_argument('--seed', type=int, help='Random seed')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def run_config(self, options) -> RunConfig:
        flags = {name: options.get(name) for name in RUN_FLAGS}
        flags['output_dir'] = flags.pop('out')
        return load_run_config(options.get('config_file'), **flags)

    def handle(self, *args, **options):
        try:
            config = self.run_config(options)
            return self.run(config, *args, **options)
        except PantsError as e:
            logger.error(f"{self.__module__.rsplit('.', 1)[-1]} failed: {e}")
            raise CommandError(str(e))

    def run(self, config: RunConfig, *args, **options):
        raise NotImplementedError
