from django.core.management.base import CommandError

from pants_orbits.invariants import run_checks
from pants_orbits.management.base import PantsCommand


class Command(PantsCommand):
    help = 'Run the property checks of the pipeline (the cli "check" subcommand)'

    def add_command_arguments(self, parser):
        parser.add_argument('--full', action='store_true',
                            help='Also construct, perturb and lift orbits (minutes)')
        parser.add_argument('--only', nargs='+', help='Run only the named checks')

    def run(self, config, *args, **options):
        try:
            results = run_checks(config, full=options['full'], only=options['only'])
        except ValueError as e:
            raise CommandError(str(e))
        for r in results:
            status = self.style.SUCCESS('pass') if r.passed else self.style.ERROR('FAIL')
            self.stdout.write(f"{r.name:<18} {status}  {r.value:.3e}  {r.seconds:6.1f}s  {r.detail}")
        failed = [r.name for r in results if not r.passed]
        if failed:
            raise CommandError(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        self.stdout.write(self.style.SUCCESS(f"all {len(results)} checks passed"))
