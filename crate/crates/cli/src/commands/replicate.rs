use rinzelkit::replicate::replicate;

use crate::error::CliError;
use crate::output::Output;

pub fn run(out: &Output) -> Result<(), CliError> {
    let rep = replicate()?;
    let text = rep.to_text();
    out.json("replicate.json", &rep)?;
    out.write("replicate.txt", &text)?;
    print!("{text}");
    Ok(())
}
