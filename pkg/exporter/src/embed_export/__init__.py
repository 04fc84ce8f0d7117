from .export import ExportManifest, export_embeddings

__all__ = ["ExportManifest", "export_embeddings"]
