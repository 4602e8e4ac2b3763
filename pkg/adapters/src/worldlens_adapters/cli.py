"""``adapt`` command-line entry point."""
import click

from .errors import AdapterError
from .extractors import EXTRACTOR_NAMES, AdapterJob, extract


@click.command()
@click.option("--extractor", required=True, type=click.Choice(EXTRACTOR_NAMES))
@click.option("--in", "video_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--device", default="cpu", show_default=True)
@click.option("--backend", default="builtin", show_default=True,
              type=click.Choice(["builtin", "pretrained"]))
@click.option("--resolution", default=None,
              help="WIDTHxHEIGHT override (defaults per extractor)")
@click.option("--video-id", default=None, help="Defaults to the clip file stem")
@click.option("--class-count", default=3, show_default=True, type=int)
@click.option("--camera-pair", default="CAM_FRONT,CAM_FRONT_RIGHT",
              show_default=True, help="Comma-separated pair for the matcher")
@click.option("--condition", default="front_center_interp", show_default=True,
              help="Trajectory condition label for quality scores")
@click.option("--weights", default=None, type=click.Path(),
              help="Local weights for the pretrained backend")
def main(extractor, video_path, out_dir, device, backend, resolution,
         video_id, class_count, camera_pair, condition, weights):
    """Convert one clip into evaluation artifacts."""
    res = None
    if resolution:
        w, h = resolution.lower().split("x")
        res = (int(w), int(h))
    job = AdapterJob(video_path=video_path, extractor=extractor,
                     out_dir=out_dir, device=device, backend=backend,
                     resolution=res, video_id=video_id,
                     class_count=class_count,
                     camera_pair=tuple(camera_pair.split(",")),
                     condition=condition, weights=weights)
    try:
        artifacts = extract(job)
    except AdapterError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")
    for name in artifacts:
        click.echo(f"wrote {out_dir}/{name}")


if __name__ == "__main__":
    main()
