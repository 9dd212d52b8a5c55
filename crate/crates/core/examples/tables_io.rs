//! Reading and writing the text formats: vector tables, concept catalogs and
//! PNM images.

use dreamgen::corpus::{
    decode_pnm, encode_pnm, parse_vector_table, ConceptCatalog, Image, MacroCategory, VectorTable,
};

fn main() -> dreamgen::Result<()> {
    let text = "3 4\ncat 0.1 0.2 0.3 0.4\ndog 0.2 0.1 0.4 0.3\ncar -0.5 0.0 0.9 1e-7\n";
    let table = parse_vector_table(text.as_bytes(), "inline")?;
    println!("{} vectors of dimension {}", table.len(), table.dim());
    println!("dog = {:?}", table.vector("dog")?);

    let animals: VectorTable = table.subset(&["cat", "dog"])?;
    println!("subset labels: {:?}", animals.labels());

    let catalog = ConceptCatalog::parse(
        "cat,mammal,ANIMAL\ncar,vehicle,MAN-MADE\n",
        "inline",
    )?;
    println!("car is {}", catalog.macro_of("car")?.as_str());
    assert_eq!(catalog.macro_of("cat")?, MacroCategory::Animal);

    let gradient: Vec<f64> = (0..16 * 8).map(|i| (i % 16) as f64 / 15.0).collect();
    let image = Image::new(16, 8, 1, gradient)?;
    let bytes = encode_pnm(&image);
    let back = decode_pnm(&bytes, "gradient.pgm")?;
    println!(
        "{}x{} gray image, {} bytes as PGM, right edge {}",
        back.width(),
        back.height(),
        bytes.len(),
        back.get(15, 0, 0)
    );
    Ok(())
}
