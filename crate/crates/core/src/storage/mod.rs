//! On-disk formats: dataset files, partition files and the skeleton document,
//! plus redistribution of a dataset into partitions.

mod dataset;
mod partition;
mod redistribute;
mod skeleton;

pub use dataset::{
    choose_sample_files, import_csv, read_csv, list_dataset_files, read_dataset_file, read_dataset_header,
    read_datasets, sample_partitions, write_dataset, write_sharded, DatasetHeader,
    DATASET_EXTENSION, DATASET_MAGIC, DATASET_VERSION,
};
pub use partition::{
    decode_path, encode_path, partition_file_name, path_has_prefix, ClusterEntry,
    PartitionContents, PartitionFile, PARTITION_EXTENSION, PARTITION_MAGIC, PARTITION_VERSION,
};
pub use redistribute::{redistribute, PartitionStats, RedistributeStats};
pub use skeleton::{
    deserialize_skeleton, load_skeleton, save_skeleton, serialize_skeleton, SKELETON_FILE_NAME,
    SKELETON_MAGIC, SKELETON_VERSION,
};
